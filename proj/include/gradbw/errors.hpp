#pragma once

#include <stdexcept>
#include <string>

namespace gradbw {

//! Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

#define GRADBW_DEFINE_ERROR(Name)                                              \
  class Name : public Error                                                    \
  {                                                                            \
  public:                                                                      \
    using Error::Error;                                                        \
  }

GRADBW_DEFINE_ERROR(InvalidArgument);
GRADBW_DEFINE_ERROR(NonBandLimited);
GRADBW_DEFINE_ERROR(GridTooCoarse);
GRADBW_DEFINE_ERROR(DivergentNorm);
GRADBW_DEFINE_ERROR(EmptyNet);
GRADBW_DEFINE_ERROR(InvalidBounds);
GRADBW_DEFINE_ERROR(DegenerateCodebook);
GRADBW_DEFINE_ERROR(EmptyCell);
GRADBW_DEFINE_ERROR(KTooLargeForExactMatching);
GRADBW_DEFINE_ERROR(UnsupportedDimension);
GRADBW_DEFINE_ERROR(InvalidQ);
GRADBW_DEFINE_ERROR(EmptyWindow);
GRADBW_DEFINE_ERROR(SingularHessian);

#undef GRADBW_DEFINE_ERROR

} // namespace gradbw
