#include "msnlab/diffusion.hpp"

#include <algorithm>
#include <ostream>
#include <tuple>
#include <unordered_map>

namespace msnlab::diffusion {

UserRoles classify_users(std::span<const PostViewRecord> recs,
                         const std::string& pid) {
  UserRoles roles;
  for (const auto& r : recs) {
    if (r.pid != pid) continue;
    roles.page_known = true;
    roles.infected.insert(r.u2);
    roles.infectious.insert(r.u1);
  }
  for (const auto& u : roles.infectious) {
    if (!roles.infected.count(u)) roles.roots.insert(u);
  }
  return roles;
}

DiffusionForest build_forest(std::span<const PostViewRecord> recs,
                             const std::string& pid) {
  DiffusionForest f;
  f.pid = pid;

  struct Attribution {
    std::int64_t t;
    std::string u1;
  };
  std::map<std::string, Attribution> best;
  std::map<std::string, std::int64_t> first_seen;

  auto note_seen = [&](const std::string& u, std::int64_t t) {
    auto [it, fresh] = first_seen.emplace(u, t);
    if (!fresh && t < it->second) it->second = t;
  };

  for (const auto& r : recs) {
    if (r.pid != pid) continue;
    note_seen(r.u1, r.t);
    note_seen(r.u2, r.t);
    auto vt = f.view_time.find(r.u2);
    if (vt == f.view_time.end()) {
      f.view_time.emplace(r.u2, r.t);
    } else if (r.t < vt->second) {
      vt->second = r.t;
    }
    if (r.u1 == r.u2) continue;  // self-views never create edges
    auto it = best.find(r.u2);
    if (it == best.end()) {
      best.emplace(r.u2, Attribution{r.t, r.u1});
    } else if (std::tie(r.t, r.u1) < std::tie(it->second.t, it->second.u1)) {
      it->second = Attribution{r.t, r.u1};
    }
  }

  for (const auto& [child, attr] : best) f.parent.emplace(child, attr.u1);
  for (const auto& [user, t] : first_seen) {
    if (!f.parent.count(user)) {
      f.roots.insert(user);
      // Seed roots have no view record of their own; keep their first
      // observed activity so exports have a timestamp for every node.
      f.view_time.emplace(user, t);
    }
  }

  // Break residual parent cycles: promote the largest member of each cycle.
  std::unordered_map<std::string, int> color;  // 0 new, 1 on path, 2 done
  for (const auto& [start, unused] : f.parent) {
    if (color[start] != 0) continue;
    std::vector<std::string> path;
    std::string cur = start;
    while (true) {
      auto it = f.parent.find(cur);
      if (it == f.parent.end() || color[cur] == 2) {
        color[cur] = 2;
        break;
      }
      if (color[cur] == 1) {  // found a cycle; cur is its entry point
        auto at = std::find(path.begin(), path.end(), cur);
        const std::string* largest = &*at;
        for (auto p = at; p != path.end(); ++p) {
          if (*p > *largest) largest = &*p;
        }
        f.parent.erase(*largest);
        f.roots.insert(*largest);
        break;
      }
      color[cur] = 1;
      path.push_back(cur);
      cur = it->second;
    }
    for (const auto& u : path) color[u] = 2;
  }

  return f;
}

void write_forest(std::ostream& out, const DiffusionForest& forest) {
  std::vector<std::string> users;
  users.reserve(forest.size());
  for (const auto& r : forest.roots) users.push_back(r);
  for (const auto& [child, unused] : forest.parent) users.push_back(child);
  std::sort(users.begin(), users.end());
  for (const auto& u : users) {
    auto it = forest.parent.find(u);
    auto vt = forest.view_time.find(u);
    out << forest.pid << '\t' << u << '\t'
        << (it == forest.parent.end() ? "-" : it->second) << '\t'
        << (vt == forest.view_time.end() ? 0 : vt->second) << '\n';
  }
}

}  // namespace msnlab::diffusion
