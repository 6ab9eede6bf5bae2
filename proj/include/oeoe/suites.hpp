// Registered verification suites, one per acceptance criterion. Each suite
// runs end to end, prints both sides of every inequality it checks, and
// returns whether all of them held.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oeoe {

struct Suite {
  std::string name;
  int criterion;
  std::string summary;
  bool (*run)(bool fast, std::ostream& out);
};

const std::vector<Suite>& suites();
const Suite* find_suite(const std::string& name);

}  // namespace oeoe
