#pragma once

#include <stdexcept>
#include <string>

namespace coneroute {

// Every failure mode the library can raise. Codes are stable identifiers so
// callers (and tests) can match on the condition instead of parsing messages.
enum class Errc {
  prob_sum_error,       // per-node broadcast distribution does not sum to 1
  self_not_in_set,      // a support set lacks its transmitter
  bad_subset,           // subset contains an out-of-range node, or node 0 transmits
  no_positive_entry,    // a node has an empty broadcast list
  degree_too_large,     // product-form constructor out-degree guard
  too_large,            // enumeration / resolution size guard
  not_connected,        // operation requires every relay to reach the destination
  not_a_partition,      // rank ordering misses or duplicates a node
  empty_class,          // rank ordering contains an empty class
  identical_orderings,  // mismatch/less_penalizes need two distinct orderings
  not_path_connected,   // ordering fails the path-connectivity requirement
  bad_prefix_length,    // penalty prefix index outside 1..M
  domain_error,         // weight function evaluated outside its domain
  length_mismatch,      // paired sequences of different lengths
  no_cone,              // no ordering beats its whole adjacency (diagnostic)
  multiple_cones,       // more than one ordering beats its adjacency (diagnostic)
  no_progress,          // cost finalization stuck: no unfinalized node reaches the done set
  lp_numerical_failure, // simplex did not reach a clean optimum
  invalid_argument,     // precondition violation not covered above
  config_error,         // config file / CLI input malformed
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace coneroute
