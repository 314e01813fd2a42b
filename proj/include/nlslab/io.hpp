#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "nlslab/evolution.hpp"
#include "nlslab/field.hpp"
#include "nlslab/groundstate.hpp"

namespace nlslab::io {

static_assert(std::endian::native == std::endian::little, "NLSF codecs assume a little-endian host");

inline constexpr char kFieldMagic[4] = {'N', 'L', 'S', 'F'};
inline constexpr std::uint32_t kFieldVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 4 + 4 + 1 + 4 + 8 + 8;

/// Round-trip decimal with 17 significant digits.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {
template <class T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& buf) : buf_(buf) {}
  template <class T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > buf_.size())
      throw Error(ErrorCode::truncated, std::string("NLSF truncated at byte offset ") + std::to_string(buf_.size()) +
                                            " while reading " + what + " (needs bytes up to " +
                                            std::to_string(pos_ + sizeof(T)) + ")");
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<unsigned char>& buf_;
  std::size_t pos_ = 0;
};

inline std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spill(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for '" + path + "'");
}
}  // namespace detail

inline std::vector<unsigned char> encode_field(const Field& f) {
  std::vector<unsigned char> out;
  out.reserve(kFieldHeaderBytes + 16 * f.size());
  out.insert(out.end(), kFieldMagic, kFieldMagic + 4);
  detail::put<std::uint32_t>(out, kFieldVersion);
  detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(f.grid.kind));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid.n));
  detail::put<double>(out, f.grid.half_width);
  detail::put<double>(out, f.time);
  const auto* p = reinterpret_cast<const unsigned char*>(f.values.data());
  out.insert(out.end(), p, p + 16 * f.size());
  return out;
}

inline Field decode_field(const std::vector<unsigned char>& buf) {
  if (buf.size() < 4 || std::memcmp(buf.data(), kFieldMagic, 4) != 0) {
    if (buf.size() < 4) throw Error(ErrorCode::truncated, "NLSF truncated at byte offset " + std::to_string(buf.size()) + " inside the magic");
    throw Error(ErrorCode::bad_magic, "not an NLSF file");
  }
  detail::Reader rd(buf);
  rd.get<std::uint32_t>("magic");
  const auto version = rd.get<std::uint32_t>("version");
  if (version != kFieldVersion)
    throw Error(ErrorCode::version_mismatch, "NLSF version " + std::to_string(version) + ", expected 1");
  const auto kind = rd.get<std::uint8_t>("kind");
  if (kind > 1) throw Error(ErrorCode::parse_error, "NLSF grid kind " + std::to_string(kind) + " is unknown");
  const auto n = rd.get<std::uint32_t>("n");
  const double L = rd.get<double>("L");
  const double t = rd.get<double>("t");
  Grid g{static_cast<GridKind>(kind), n, L};
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, std::string("NLSF header: ") + e.what());
  }
  Field f(g, t);
  const std::size_t need = kFieldHeaderBytes + 16 * f.size();
  if (buf.size() < need)
    throw Error(ErrorCode::truncated, "NLSF truncated at byte offset " + std::to_string(buf.size()) + " of " +
                                          std::to_string(need) + " (sample payload)");
  if (buf.size() > need)
    throw Error(ErrorCode::parse_error, "NLSF has " + std::to_string(buf.size() - need) + " trailing bytes");
  std::memcpy(f.values.data(), buf.data() + kFieldHeaderBytes, 16 * f.size());
  return f;
}

inline void write_field(const std::string& path, const Field& f) {
  const auto bytes = encode_field(f);
  detail::spill(path, std::string(bytes.begin(), bytes.end()));
}

inline Field read_field(const std::string& path) { return decode_field(detail::slurp(path)); }

// ---- NLSQ ground-state profile ----------------------------------------------

inline std::string encode_profile(const GroundState& q) {
  std::ostringstream os;
  os << "# nlsq v1\n";
  os << "# rmax=" << fmt(q.r_max) << " n=" << q.n << " tol=" << fmt(q.tol) << "\n";
  os << "# mass_sq=" << fmt(q.mass_sq) << " grad_sq=" << fmt(q.grad_sq) << " l4_4=" << fmt(q.l4_4) << "\n";
  os << "# tail_coeff=" << fmt(q.tail_coeff) << " match_radius=" << fmt(q.match_radius) << "\n";
  for (std::size_t i = 0; i < q.profile.size(); ++i) os << fmt(q.r[i]) << ' ' << fmt(q.profile[i]) << '\n';
  return os.str();
}

namespace detail {
inline double header_value(const std::string& line, const std::string& key, bool required, double fallback,
                           int lineno) {
  const std::string pat = key + "=";
  std::size_t pos = 0;
  while ((pos = line.find(pat, pos)) != std::string::npos) {
    if (pos == 0 || line[pos - 1] == ' ' || line[pos - 1] == '#') break;
    ++pos;
  }
  if (pos == std::string::npos) {
    if (required) throw Error(ErrorCode::parse_error, "NLSQ line " + std::to_string(lineno) + ": missing " + key);
    return fallback;
  }
  const char* start = line.c_str() + pos + pat.size();
  char* end = nullptr;
  const double v = std::strtod(start, &end);
  if (end == start) throw Error(ErrorCode::parse_error, "NLSQ line " + std::to_string(lineno) + ": bad " + key);
  return v;
}
}  // namespace detail

inline GroundState decode_profile(const std::string& text, double cert_tol = 1e-6) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  GroundState q;
  bool have_version = false, have_grid = false, have_norms = false;
  double tail = -1.0, match = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("nlsq") != std::string::npos) {
        if (line.find("v1") == std::string::npos)
          throw Error(ErrorCode::version_mismatch, "NLSQ line " + std::to_string(lineno) + ": unsupported version");
        have_version = true;
      } else if (line.find("rmax=") != std::string::npos) {
        q.r_max = detail::header_value(line, "rmax", true, 0, lineno);
        q.n = static_cast<std::size_t>(detail::header_value(line, "n", true, 0, lineno));
        q.tol = detail::header_value(line, "tol", true, 0, lineno);
        have_grid = true;
      } else if (line.find("mass_sq=") != std::string::npos) {
        q.mass_sq = detail::header_value(line, "mass_sq", true, 0, lineno);
        q.grad_sq = detail::header_value(line, "grad_sq", true, 0, lineno);
        q.l4_4 = detail::header_value(line, "l4_4", true, 0, lineno);
        have_norms = true;
      } else if (line.find("tail_coeff=") != std::string::npos) {
        tail = detail::header_value(line, "tail_coeff", true, 0, lineno);
        match = detail::header_value(line, "match_radius", false, 0, lineno);
      }
      continue;
    }
    std::istringstream ls(line);
    double r, v;
    if (!(ls >> r >> v)) throw Error(ErrorCode::parse_error, "NLSQ line " + std::to_string(lineno) + ": expected 'r value'");
    q.r.push_back(r);
    q.profile.push_back(v);
  }
  if (!have_version) throw Error(ErrorCode::bad_magic, "missing '# nlsq v1' header");
  if (!have_grid || !have_norms) throw Error(ErrorCode::parse_error, "NLSQ header incomplete");
  if (q.profile.size() != q.n + 1)
    throw Error(ErrorCode::truncated, "NLSQ has " + std::to_string(q.profile.size()) + " samples, header promises " +
                                          std::to_string(q.n + 1));
  q.shoot_value = q.profile.front();
  if (tail < 0.0) {
    tail = q.profile.back() * q.r_max * std::exp(q.r_max);
    match = q.r_max;
  }
  q.tail_coeff = tail;
  q.match_radius = match;
  certify_from_norms(q);
  require_certified(q, cert_tol);
  return q;
}

inline void write_profile(const std::string& path, const GroundState& q) { detail::spill(path, encode_profile(q)); }

inline GroundState read_profile(const std::string& path, double cert_tol = 1e-6) {
  const auto bytes = detail::slurp(path);
  return decode_profile(std::string(bytes.begin(), bytes.end()), cert_tol);
}

// ---- diagnostics CSV ----------------------------------------------------------

inline constexpr const char* kCsvHeader = "t,mass,energy,grad_sq,l4_4,eta,variance,rprime,z_R,eta_geq_R,A_R_bound";

inline std::string encode_csv(const VirialSeries& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    const double v[] = {r.t,        r.mass,   r.energy, r.grad_sq,   r.l4_4,     r.eta,
                        r.variance, r.rprime, r.z_R,    r.eta_geq_R, r.A_R_bound};
    for (std::size_t i = 0; i < std::size(v); ++i) {
      if (i) out += ',';
      out += fmt(v[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::string& path, const VirialSeries& rows) { detail::spill(path, encode_csv(rows)); }

inline VirialSeries decode_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw Error(ErrorCode::parse_error, "CSV line 1: header does not match '" + std::string(kCsvHeader) + "'");
  VirialSeries rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[11];
    const char* p = line.c_str();
    for (int i = 0; i < 11; ++i) {
      char* end = nullptr;
      v[i] = std::strtod(p, &end);
      if (end == p) throw Error(ErrorCode::parse_error, "CSV line " + std::to_string(lineno) + ": bad field " + std::to_string(i + 1));
      p = end;
      if (i < 10) {
        if (*p != ',') throw Error(ErrorCode::parse_error, "CSV line " + std::to_string(lineno) + ": expected ','");
        ++p;
      }
    }
    DiagnosticRow r;
    r.t = v[0];
    r.mass = v[1];
    r.energy = v[2];
    r.grad_sq = v[3];
    r.l4_4 = v[4];
    r.eta = v[5];
    r.variance = v[6];
    r.rprime = v[7];
    r.z_R = v[8];
    r.eta_geq_R = v[9];
    r.A_R_bound = v[10];
    rows.push_back(r);
  }
  return rows;
}

inline VirialSeries read_csv(const std::string& path) {
  const auto bytes = detail::slurp(path);
  return decode_csv(std::string(bytes.begin(), bytes.end()));
}

}  // namespace nlslab::io
