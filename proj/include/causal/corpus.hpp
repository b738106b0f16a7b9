// Generators for the bundled benchmark models and properties.

#pragma once

#include <map>
#include <string>

namespace causal::corpus {

/// The Esparza–Heljanko family: P0 and P1 synchronise on `a`, each of
/// P1..Pn has a private `b_i`, and all n+1 processes meet in `c`. With
/// `mutated`, P1's `a1` lands in s2 instead of s4 and `c` becomes reachable.
std::string esparza(int n, bool mutated = false);

/// Producers move tokens from their pool p_i into queues q_1..q_queues;
/// consumer i drains q_i. `decrement = false` drops the consumer's
/// `q_i := q_i - 1`, which makes the system non-terminating.
std::string prodcons(int producers, int consumers, int queues, int pool,
                     bool decrement = true, const std::string& name = "");

/// Two processes idle -> try -> crit -> idle, guarded by a shared lock
/// unless `broken`.
std::string lock(bool broken);

std::string reach_c();
std::string termination();
std::string mutex();
std::string precedence();
std::string overtaking();

/// Every checked-in file, keyed by path relative to the corpus root.
std::map<std::string, std::string> files();

}  // namespace causal::corpus
