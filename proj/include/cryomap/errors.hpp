#pragma once
#include <stdexcept>
#include <string>

namespace cryomap {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CRYOMAP_DEFINE_ERROR(Name)                                  \
    struct Name : Error {                                           \
        explicit Name(const std::string& msg) : Error(msg) {}       \
    }

CRYOMAP_DEFINE_ERROR(NonHermitianInput);
CRYOMAP_DEFINE_ERROR(NonHermitianAccumulator);
CRYOMAP_DEFINE_ERROR(BlobOutOfGrid);
CRYOMAP_DEFINE_ERROR(OutsideWindow);
CRYOMAP_DEFINE_ERROR(OddParticleCount);
CRYOMAP_DEFINE_ERROR(StepDiverged);
CRYOMAP_DEFINE_ERROR(EmptyMask);
CRYOMAP_DEFINE_ERROR(GridMismatch);
CRYOMAP_DEFINE_ERROR(NonPositiveScale);
CRYOMAP_DEFINE_ERROR(BadMagic);
CRYOMAP_DEFINE_ERROR(UnsupportedMode);
CRYOMAP_DEFINE_ERROR(TruncatedFile);
CRYOMAP_DEFINE_ERROR(IoError);
CRYOMAP_DEFINE_ERROR(ParseError);
CRYOMAP_DEFINE_ERROR(InvalidArgument);

#undef CRYOMAP_DEFINE_ERROR

} // namespace cryomap
