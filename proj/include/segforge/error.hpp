#pragma once

#include <stdexcept>
#include <string>

namespace segforge {

// Base class for every error the library reports. Each subclass names one
// failure condition so callers (and the CLI) can react to it specifically.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SEGFORGE_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// knowledge
SEGFORGE_DEFINE_ERROR(UnknownElement);
SEGFORGE_DEFINE_ERROR(MalformedRecord);
SEGFORGE_DEFINE_ERROR(DuplicateCompound);

// contentspace
SEGFORGE_DEFINE_ERROR(DimensionTooSmall);
SEGFORGE_DEFINE_ERROR(EmptyMazeSet);
SEGFORGE_DEFINE_ERROR(MazeFeatureMismatch);
SEGFORGE_DEFINE_ERROR(InsufficientData);

// clustering
SEGFORGE_DEFINE_ERROR(DimensionMismatch);
SEGFORGE_DEFINE_ERROR(TooFewClusters);
SEGFORGE_DEFINE_ERROR(SingleCluster);
SEGFORGE_DEFINE_ERROR(NoFeasibleThreshold);

// mapping
SEGFORGE_DEFINE_ERROR(CardinalityMismatch);
SEGFORGE_DEFINE_ERROR(IntegrityViolation);
SEGFORGE_DEFINE_ERROR(CorruptStore);

// engine
SEGFORGE_DEFINE_ERROR(WeightLengthMismatch);
SEGFORGE_DEFINE_ERROR(UnknownMaterial);
SEGFORGE_DEFINE_ERROR(EmptyPool);
SEGFORGE_DEFINE_ERROR(CurriculumComplete);

// stats
SEGFORGE_DEFINE_ERROR(InsufficientSample);

// cli
SEGFORGE_DEFINE_ERROR(MissingPrerequisite);
SEGFORGE_DEFINE_ERROR(ConfigInvalid);

#undef SEGFORGE_DEFINE_ERROR

}  // namespace segforge
