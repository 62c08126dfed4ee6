#include "msnlab/records.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <ostream>
#include <unordered_set>

namespace msnlab::records {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

std::uint32_t parse_ipv4(const std::string& text) {
  std::uint32_t ip = 0;
  int octets = 0;
  const char* p = text.data();
  const char* end = p + text.size();
  while (octets < 4) {
    unsigned value = 0;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc() || next == p || value > 255 || next - p > 3) {
      throw InvalidIpError("not a dotted-quad IPv4 address: " + text);
    }
    ip = (ip << 8) | value;
    ++octets;
    p = next;
    if (octets < 4) {
      if (p == end || *p != '.') {
        throw InvalidIpError("not a dotted-quad IPv4 address: " + text);
      }
      ++p;
    }
  }
  if (p != end) {
    throw InvalidIpError("not a dotted-quad IPv4 address: " + text);
  }
  return ip;
}

std::string format_ipv4(std::uint32_t ip) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 255,
                (ip >> 16) & 255, (ip >> 8) & 255, ip & 255);
  return buf;
}

PostViewRecord parse_record(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (fields.size() != 5) {
    throw MalformedRecordError("expected 5 comma-separated fields, got " +
                               std::to_string(fields.size()));
  }
  for (int i = 0; i < 3; ++i) {
    if (fields[i].empty()) {
      throw MalformedRecordError("empty id field in record: " + line);
    }
  }
  PostViewRecord r;
  r.u1 = fields[0];
  r.u2 = fields[1];
  r.pid = fields[2];
  r.ip = parse_ipv4(fields[3]);
  std::int64_t t = 0;
  const auto& ts = fields[4];
  auto [next, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), t);
  if (ec != std::errc() || next != ts.data() + ts.size() || t < 0) {
    throw InvalidTimestampError("not a non-negative integer timestamp: " + ts);
  }
  r.t = t;
  return r;
}

std::string format_record(const PostViewRecord& r) {
  return r.u1 + "," + r.u2 + "," + r.pid + "," + format_ipv4(r.ip) + "," +
         std::to_string(r.t);
}

DatasetStats compute_stats(std::span<const PostViewRecord> recs) {
  DatasetStats s;
  std::unordered_set<std::string> users;
  std::unordered_set<std::string> pages;
  for (const auto& r : recs) {
    ++s.record_count;
    users.insert(r.u1);
    users.insert(r.u2);
    pages.insert(r.pid);
    if (r.u1 == r.u2) ++s.self_view_count;
    if (!s.has_time_span) {
      s.t_min = s.t_max = r.t;
      s.has_time_span = true;
    } else {
      s.t_min = std::min(s.t_min, r.t);
      s.t_max = std::max(s.t_max, r.t);
    }
  }
  s.user_count = static_cast<std::int64_t>(users.size());
  s.page_count = static_cast<std::int64_t>(pages.size());
  return s;
}

std::vector<PostViewRecord> read_records(std::istream& in) {
  std::vector<PostViewRecord> out;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    try {
      out.push_back(parse_record(line));
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PostViewRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open records file: " + path);
  return read_records(in);
}

void write_records(std::ostream& out, std::span<const PostViewRecord> recs) {
  for (const auto& r : recs) out << format_record(r) << '\n';
}

void write_records_file(const std::string& path,
                        std::span<const PostViewRecord> recs) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path);
  write_records(out, recs);
}

}  // namespace msnlab::records
