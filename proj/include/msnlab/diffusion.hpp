#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>

#include "msnlab/records.hpp"

namespace msnlab::diffusion {

using records::PostViewRecord;

// Per-page parent structure: every viewer is attributed to the post owner
// they first viewed from.
struct DiffusionForest {
  std::string pid;
  std::map<std::string, std::string> parent;    // child -> parent, roots absent
  std::set<std::string> roots;
  std::map<std::string, std::int64_t> view_time;  // earliest view per user

  std::size_t size() const { return roots.size() + parent.size(); }
};

struct UserRoles {
  std::set<std::string> infected;    // viewed the page
  std::set<std::string> infectious;  // had the page on their own page
  std::set<std::string> roots;       // infectious users who never viewed
  bool page_known = false;
};

UserRoles classify_users(std::span<const PostViewRecord> recs,
                         const std::string& pid);

// Earliest view wins; ties on t broken by the lexicographically smallest
// owner. Self-view records do not create edges. Residual parent cycles
// (possible only with out-of-order timestamps) are broken by promoting the
// lexicographically largest member of each cycle to a root.
DiffusionForest build_forest(std::span<const PostViewRecord> recs,
                             const std::string& pid);

// TSV export: pid, child, parent ('-' for roots), view_time.
void write_forest(std::ostream& out, const DiffusionForest& forest);

}  // namespace msnlab::diffusion
