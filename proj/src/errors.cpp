#include "coneroute/errors.hpp"

namespace coneroute {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::prob_sum_error: return "ProbSumError";
    case Errc::self_not_in_set: return "SelfNotInSet";
    case Errc::bad_subset: return "BadSubset";
    case Errc::no_positive_entry: return "NoPositiveEntry";
    case Errc::degree_too_large: return "DegreeTooLarge";
    case Errc::too_large: return "TooLarge";
    case Errc::not_connected: return "NotConnected";
    case Errc::not_a_partition: return "NotAPartition";
    case Errc::empty_class: return "EmptyClass";
    case Errc::identical_orderings: return "IdenticalOrderings";
    case Errc::not_path_connected: return "NotPathConnected";
    case Errc::bad_prefix_length: return "BadPrefixLength";
    case Errc::domain_error: return "DomainError";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::no_cone: return "NoCone";
    case Errc::multiple_cones: return "MultipleCones";
    case Errc::no_progress: return "NoProgress";
    case Errc::lp_numerical_failure: return "LpNumericalFailure";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace coneroute
