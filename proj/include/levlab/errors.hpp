#pragma once

#include <stdexcept>
#include <string>

namespace levlab {

/// Base for all failures the library reports; name() is stable and machine-readable.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what) : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define LEVLAB_DEFINE_ERROR(NAME)                                                       \
    class NAME : public Error {                                                         \
    public:                                                                             \
        explicit NAME(const std::string& what) : Error(#NAME, what) {}                  \
    }

LEVLAB_DEFINE_ERROR(DefectiveMatrix);
LEVLAB_DEFINE_ERROR(SingularAtResonance);
LEVLAB_DEFINE_ERROR(SingularOverlap);
LEVLAB_DEFINE_ERROR(HermitianDegenerate);
LEVLAB_DEFINE_ERROR(TrivialPhase);
LEVLAB_DEFINE_ERROR(NoPeaks);
LEVLAB_DEFINE_ERROR(FitDiverged);
LEVLAB_DEFINE_ERROR(RankDeficient);
LEVLAB_DEFINE_ERROR(WeakPrefactor);
LEVLAB_DEFINE_ERROR(EPTooClose);
LEVLAB_DEFINE_ERROR(TrackingAmbiguous);
LEVLAB_DEFINE_ERROR(SchemaMismatch);
LEVLAB_DEFINE_ERROR(EmptySeries);
LEVLAB_DEFINE_ERROR(ConfigError);

#undef LEVLAB_DEFINE_ERROR

}  // namespace levlab
