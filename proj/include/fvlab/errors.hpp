#pragma once

#include <stdexcept>
#include <string>

namespace fvlab {

/// Base class of every domain error raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FVLAB_DEFINE_ERROR(Name)                                \
  struct Name : Error {                                         \
    explicit Name(const std::string& w) : Error(#Name ": " + w) {} \
  }

FVLAB_DEFINE_ERROR(InvalidArgument);
FVLAB_DEFINE_ERROR(InvalidGeometry);
FVLAB_DEFINE_ERROR(EmptyDomain);
FVLAB_DEFINE_ERROR(DisconnectedDomain);
FVLAB_DEFINE_ERROR(NonPositiveCoefficient);
FVLAB_DEFINE_ERROR(MissingPatchBC);
FVLAB_DEFINE_ERROR(PinOnDirichletSystem);
FVLAB_DEFINE_ERROR(NotSPDDetected);
FVLAB_DEFINE_ERROR(NegativeQuadraticForm);
FVLAB_DEFINE_ERROR(NoConvergence);
FVLAB_DEFINE_ERROR(FeatureMismatch);
FVLAB_DEFINE_ERROR(UnstableDynamics);
FVLAB_DEFINE_ERROR(IoError);

#undef FVLAB_DEFINE_ERROR

}  // namespace fvlab
