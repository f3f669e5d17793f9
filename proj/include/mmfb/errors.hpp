#pragma once

#include <stdexcept>
#include <string>

namespace mmfb {

// Base class for all solver errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define MMFB_DEFINE_ERROR(NAME)   \
  struct NAME : Error {           \
    using Error::Error;           \
  }

// Mesh / geometry
MMFB_DEFINE_ERROR(DegenerateElement);
MMFB_DEFINE_ERROR(IndexOutOfRange);
MMFB_DEFINE_ERROR(NonManifoldBoundary);

// File I/O and problem setup
MMFB_DEFINE_ERROR(ParseError);
MMFB_DEFINE_ERROR(TagError);
MMFB_DEFINE_ERROR(InvalidParameter);
MMFB_DEFINE_ERROR(UnknownProblem);
MMFB_DEFINE_ERROR(IoError);

// FEM assembly
MMFB_DEFINE_ERROR(ConnectivityMismatch);
MMFB_DEFINE_ERROR(NonpositiveDiffusivity);

// Time integration
MMFB_DEFINE_ERROR(StageSolveFailure);
MMFB_DEFINE_ERROR(StepUnderflow);

// Gradient recovery
MMFB_DEFINE_ERROR(RankDeficientStencil);

// Free-boundary update
MMFB_DEFINE_ERROR(RetryExhausted);

// Mesh movement
MMFB_DEFINE_ERROR(MeshFlowFailure);
MMFB_DEFINE_ERROR(TangledOutput);

#undef MMFB_DEFINE_ERROR

}  // namespace mmfb
