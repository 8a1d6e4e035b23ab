#include "arp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "arp/memo.hpp"

namespace arp {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// 53-bit uniform in [0, 1); bit-exact on any IEEE-754 platform.
double uniform53(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

OrbitalElements earth_elements() {
  OrbitalElements el;
  el.a_km = Constants::au_km;
  el.e = 0.0167;
  el.i = 0.0;
  el.raan = 0.0;
  el.argp = 102.9 * kPi / 180.0;
  el.M0 = 0.0;
  el.epoch = 0.0;
  return el;
}

Instance generate(int n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("generate: need at least one asteroid");
  Instance inst;
  inst.names.push_back("Earth");
  inst.bodies.push_back(earth_elements());

  std::uint64_t state = seed;
  for (int k = 1; k <= n; ++k) {
    OrbitalElements el;
    el.a_km = (2.0 + 1.5 * uniform53(state)) * Constants::au_km;
    el.e = 0.25 * uniform53(state);
    el.i = (10.0 * kPi / 180.0) * uniform53(state);
    el.raan = 2.0 * kPi * uniform53(state);
    el.argp = 2.0 * kPi * uniform53(state);
    el.M0 = 2.0 * kPi * uniform53(state);
    el.epoch = 0.0;
    char name[16];
    std::snprintf(name, sizeof(name), "ast-%03d", k);
    inst.names.push_back(name);
    inst.bodies.push_back(el);
  }
  return inst;
}

namespace {

const char* kHeader = "name,a_km,e,i_rad,raan_rad,argp_rad,M0_rad,epoch_day";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto begin = field.find_first_not_of(" \t\r");
    const auto end = field.find_last_not_of(" \t\r");
    out.push_back(begin == std::string::npos
                      ? std::string()
                      : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& text, int line_no, const char* col) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing junk");
    return value;
  } catch (const std::exception&) {
    throw ParseError("csv line " + std::to_string(line_no) +
                     ": bad value for column " + col + ": '" + text + "'");
  }
}

}  // namespace

Instance load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty instance file: " + path);
  {
    auto header = split_csv_line(line);
    auto expected = split_csv_line(kHeader);
    if (header != expected) {
      throw ParseError("csv header mismatch; expected '" +
                       std::string(kHeader) + "'");
    }
  }

  std::vector<std::string> names;
  std::vector<OrbitalElements> bodies;
  int earth_row = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 8) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected 8 columns, got " +
                       std::to_string(fields.size()));
    }
    OrbitalElements el;
    el.a_km = parse_double(fields[1], line_no, "a_km");
    el.e = parse_double(fields[2], line_no, "e");
    el.i = parse_double(fields[3], line_no, "i_rad");
    el.raan = parse_double(fields[4], line_no, "raan_rad");
    el.argp = parse_double(fields[5], line_no, "argp_rad");
    el.M0 = parse_double(fields[6], line_no, "M0_rad");
    el.epoch = parse_double(fields[7], line_no, "epoch_day");
    if (fields[0].empty()) {
      throw ParseError("csv line " + std::to_string(line_no) + ": empty name");
    }
    if (!(el.a_km > 0.0)) {
      throw ValidationError("csv line " + std::to_string(line_no) +
                            ": semi-major axis must be positive");
    }
    if (!(el.e >= 0.0 && el.e < 1.0)) {
      throw ValidationError("csv line " + std::to_string(line_no) +
                            ": eccentricity out of [0, 1)");
    }
    if (fields[0] == "Earth") {
      if (earth_row >= 0) {
        throw ValidationError("csv line " + std::to_string(line_no) + ": duplicate Earth row");
      }
      earth_row = static_cast<int>(names.size());
    }
    names.push_back(fields[0]);
    bodies.push_back(el);
  }
  if (bodies.empty()) throw ParseError("instance file has no body rows");

  Instance inst;
  double epoch_shift = 0.0;
  if (earth_row >= 0) {
    epoch_shift = bodies[earth_row].epoch;
    inst.names.push_back(names[earth_row]);
    inst.bodies.push_back(bodies[earth_row]);
  } else {
    inst.names.push_back("Earth");
    inst.bodies.push_back(earth_elements());
  }
  for (std::size_t row = 0; row < bodies.size(); ++row) {
    if (static_cast<int>(row) == earth_row) continue;
    inst.names.push_back(names[row]);
    inst.bodies.push_back(bodies[row]);
  }
  for (auto& el : inst.bodies) el.epoch -= epoch_shift;
  if (inst.n() < 1) throw ValidationError("instance needs at least one asteroid");
  return inst;
}

void save_csv(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write instance file: " + path);
  out << kHeader << "\n";
  char buf[256];
  for (std::size_t k = 0; k < instance.bodies.size(); ++k) {
    const auto& el = instance.bodies[k];
    std::snprintf(buf, sizeof(buf),
                  "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  instance.names[k].c_str(), el.a_km, el.e, el.i, el.raan,
                  el.argp, el.M0, el.epoch);
    out << buf;
  }
  if (!out) throw ParseError("write failed: " + path);
}

void validate_tour(const Instance& instance, const Tour& tour) {
  const int n = instance.n();
  if (tour.size() != static_cast<std::size_t>(n) + 1 || tour.empty() || tour[0] != 0) {
    throw ValidationError("tour must start at Earth (0) and visit all asteroids");
  }
  std::vector<bool> seen(n + 1, false);
  for (std::size_t k = 1; k < tour.size(); ++k) {
    const int body = tour[k];
    if (body < 1 || body > n || seen[body]) {
      throw ValidationError("tour is not a permutation of 1.." + std::to_string(n));
    }
    seen[body] = true;
  }
}

double evaluate_tour(const Instance& instance, const Tour& tour,
                     BoundMemo& memo, int multi) {
  validate_tour(instance, tour);
  memo.trie.set_horizon(instance.tau_max, instance.t_max);
  return memo.trie.evaluate(tour, multi).cost;
}

}  // namespace arp
