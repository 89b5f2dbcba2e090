#pragma once

#include <set>
#include <string>

namespace rdfleet {

/// A chemical species. An empty `allowed_subdomains` set means "everywhere".
struct Species {
  std::string name;
  double diffusion_constant = 0.0;
  std::set<int> allowed_subdomains;

  bool allowed_in(int label) const { return allowed_subdomains.empty() || allowed_subdomains.count(label) != 0; }
};

}  // namespace rdfleet
