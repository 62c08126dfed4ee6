#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msnlab/errors.hpp"

namespace msnlab::records {

// One post-view event: viewer u2 at address ip viewed page pid of user u1
// at time t (epoch seconds, UTC).
struct PostViewRecord {
  std::string u1;
  std::string u2;
  std::string pid;
  std::uint32_t ip = 0;  // host byte order
  std::int64_t t = 0;

  bool operator==(const PostViewRecord&) const = default;
};

std::uint32_t parse_ipv4(const std::string& text);
std::string format_ipv4(std::uint32_t ip);

// Parses one comma-separated line "u1,u2,pid,ip,t". Fields are trimmed of
// surrounding whitespace but otherwise taken verbatim.
PostViewRecord parse_record(const std::string& line);
std::string format_record(const PostViewRecord& r);

struct DatasetStats {
  std::int64_t record_count = 0;
  std::int64_t user_count = 0;  // distinct ids over u1 and u2
  std::int64_t page_count = 0;
  std::int64_t self_view_count = 0;  // records with u1 == u2
  bool has_time_span = false;
  std::int64_t t_min = 0;
  std::int64_t t_max = 0;
};

DatasetStats compute_stats(std::span<const PostViewRecord> recs);

// Records-file I/O: one record per line, '#' lines are comments, blank
// lines are skipped. Parse failures carry the 1-based line number.
std::vector<PostViewRecord> read_records(std::istream& in);
std::vector<PostViewRecord> read_records_file(const std::string& path);
void write_records(std::ostream& out, std::span<const PostViewRecord> recs);
void write_records_file(const std::string& path,
                        std::span<const PostViewRecord> recs);

}  // namespace msnlab::records
