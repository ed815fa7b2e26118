#include "expstab/spectrum_io.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

namespace expstab {

namespace {

constexpr std::string_view kMagic = "# expstab-spectrum v1";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("snapshot: bad number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_size(std::string_view s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("snapshot: bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const SpectrumSnapshot& snap) {
  if (static_cast<std::size_t>(snap.values.size()) != snap.nx)
    throw std::invalid_argument("snapshot: Nx does not match the data length");
  os << kMagic << " problem=" << snap.problem << " Nx=" << snap.nx << " t=" << format_double(snap.t);
  if (snap.blowup_step) os << " status=blowup blowup_step=" << *snap.blowup_step;
  os << '\n';
  for (Eigen::Index i = 0; i < snap.values.size(); ++i)
    os << format_double(snap.values(i).real()) << ',' << format_double(snap.values(i).imag()) << '\n';
}

SpectrumSnapshot read_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("snapshot: missing header");
  if (header.rfind(kMagic, 0) != 0) throw std::runtime_error("snapshot: bad header");
  SpectrumSnapshot snap;
  bool have_nx = false, have_t = false;
  std::istringstream tokens(header.substr(kMagic.size()));
  std::string token;
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::runtime_error("snapshot: bad header token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "problem") {
      snap.problem = value;
    } else if (key == "Nx") {
      snap.nx = parse_size(value);
      have_nx = true;
    } else if (key == "t") {
      snap.t = parse_double(value);
      have_t = true;
    } else if (key == "blowup_step") {
      snap.blowup_step = parse_size(value);
    } else if (key != "status") {
      throw std::runtime_error("snapshot: unknown header key '" + key + "'");
    }
  }
  if (!have_nx || !have_t || snap.problem.empty()) throw std::runtime_error("snapshot: incomplete header");
  snap.values.resize(static_cast<Eigen::Index>(snap.nx));
  std::string line;
  for (std::size_t i = 0; i < snap.nx; ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("snapshot: truncated data");
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("snapshot: bad data line");
    snap.values(static_cast<Eigen::Index>(i)) =
        Complex(parse_double(std::string_view(line).substr(0, comma)),
                parse_double(std::string_view(line).substr(comma + 1)));
  }
  return snap;
}

std::vector<SpectrumSnapshot> read_snapshots(std::istream& is) {
  std::vector<SpectrumSnapshot> out;
  while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_snapshot(is));
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << contents;
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot publish " + path.string() + ": " + ec.message());
  }
}

}  // namespace expstab
