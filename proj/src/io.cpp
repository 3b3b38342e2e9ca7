#include "gdoa/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "gdoa/errors.hpp"

namespace gdoa {
namespace {

using nlohmann::json;

constexpr std::array<char, 5> kMagic{'G', 'D', 'O', 'A', '1'};

double parse_double(std::string_view s, const char* what) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || end != s.data() + s.size())
    throw ParseError(std::string("snapshot file: bad ") + what + " '" + std::string(s) + "'");
  return x;
}

long parse_int(std::string_view s, const char* what) {
  long x = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || end != s.data() + s.size() || x < 1)
    throw ParseError(std::string("snapshot file: bad ") + what + " '" + std::string(s) + "'");
  return x;
}

std::string case_tag(const std::optional<NoiseCase>& c) {
  return c ? std::string(to_string(*c)) : std::string("-");
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw ParseError("snapshot file: truncated binary data");
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void check_finite(const SnapshotMatrix& Y) {
  if (!Y.data.allFinite()) throw DataError("snapshot file: non-finite entries");
}

SnapshotFile read_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("snapshot file: missing header");
  std::istringstream header(line);
  std::string ms, ls, extra;
  if (!(header >> ms >> ls) || (header >> extra))
    throw ParseError("snapshot file: header must be 'M L'");
  const long M = parse_int(ms, "M");
  const long L = parse_int(ls, "L");
  if (!std::getline(in, line)) throw ParseError("snapshot file: missing case line");
  SnapshotFile f;
  if (line != "-") {
    try {
      f.noise_case = parse_noise_case(line);
    } catch (const Error&) {
      throw ParseError("snapshot file: unknown case tag '" + line + "'");
    }
  }
  f.snapshots.data.resize(M, L);
  for (long l = 0; l < L; ++l)
    for (long m = 0; m < M; ++m) {
      if (!std::getline(in, line))
        throw ParseError("snapshot file: expected " + std::to_string(M * L) + " entries");
      std::istringstream row(line);
      std::string re, im;
      if (!(row >> re >> im) || (row >> extra))
        throw ParseError("snapshot file: entry lines must be 're im'");
      f.snapshots.data(m, l) = {parse_double(re, "real part"), parse_double(im, "imaginary part")};
    }
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      throw ParseError("snapshot file: trailing data");
  check_finite(f.snapshots);
  return f;
}

SnapshotFile read_binary(std::istream& in) {
  std::array<char, kMagic.size()> magic;
  in.read(magic.data(), magic.size());
  if (magic != kMagic) throw ParseError("snapshot file: bad magic");
  const auto M = get_le<std::uint32_t>(in);
  const auto L = get_le<std::uint32_t>(in);
  const auto code = get_le<std::uint8_t>(in);
  if (M == 0 || L == 0) throw ParseError("snapshot file: zero dimension");
  if (code > 4) throw ParseError("snapshot file: bad case code");
  SnapshotFile f;
  if (code > 0) f.noise_case = static_cast<NoiseCase>(code - 1);
  f.snapshots.data.resize(M, L);
  for (std::uint32_t l = 0; l < L; ++l)
    for (std::uint32_t m = 0; m < M; ++m) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      f.snapshots.data(m, l) = {re, im};
    }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("snapshot file: trailing data");
  check_finite(f.snapshots);
  return f;
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("bad value for key '") + key + "'");
  }
}

template <typename T>
T optional_key(const json& j, const char* key, T fallback) {
  return j.contains(key) ? require<T>(j, key) : fallback;
}

double number_or_inf(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  const json& v = j.at(key);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    throw ParseError(std::string("bad value for key '") + key + "'");
  }
  return require<double>(j, key);
}

json matrix_json(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMatrix matrix_from_json(const json& j, const char* key, Eigen::Index rows, Eigen::Index cols) {
  const auto v = require<std::vector<std::vector<double>>>(j, key);
  if (static_cast<Eigen::Index>(v.size()) != rows)
    throw ParseError(std::string("key '") + key + "' has the wrong number of rows");
  RMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(v[r].size()) != cols)
      throw ParseError(std::string("key '") + key + "' has the wrong number of columns");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[r][c];
  }
  return m;
}

} // namespace

std::string format_double(double x) { return fmt::format("{}", x); }

void write_snapshots_text(std::ostream& out, const SnapshotFile& file) {
  const CMatrix& Y = file.snapshots.data;
  out << Y.rows() << ' ' << Y.cols() << '\n' << case_tag(file.noise_case) << '\n';
  for (Eigen::Index l = 0; l < Y.cols(); ++l)
    for (Eigen::Index m = 0; m < Y.rows(); ++m)
      out << format_double(Y(m, l).real()) << ' ' << format_double(Y(m, l).imag()) << '\n';
}

void write_snapshots_binary(std::ostream& out, const SnapshotFile& file) {
  const CMatrix& Y = file.snapshots.data;
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(Y.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(Y.cols()));
  put_le<std::uint8_t>(out, file.noise_case ? static_cast<std::uint8_t>(*file.noise_case) + 1 : 0);
  for (Eigen::Index l = 0; l < Y.cols(); ++l)
    for (Eigen::Index m = 0; m < Y.rows(); ++m) {
      put_le<double>(out, Y(m, l).real());
      put_le<double>(out, Y(m, l).imag());
    }
}

SnapshotFile read_snapshots(std::istream& in) {
  const int first = in.peek();
  if (first == kMagic[0]) return read_binary(in);
  return read_text(in);
}

void save_snapshots(const std::filesystem::path& path, const SnapshotFile& file, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  if (binary)
    write_snapshots_binary(out, file);
  else
    write_snapshots_text(out, file);
  if (!out) throw InputError("failed writing " + path.string());
}

SnapshotFile load_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return read_snapshots(in);
}

ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("scenario must be a JSON object");
  ScenarioConfig c;
  c.M = require<int>(j, "M");
  c.L = require<int>(j, "L");
  if (j.contains("omegas")) {
    c.true_omegas = require<std::vector<double>>(j, "omegas");
  } else if (j.contains("thetas_deg")) {
    for (double t : require<std::vector<double>>(j, "thetas_deg"))
      c.true_omegas.push_back(theta_to_omega(t));
  } else {
    throw ParseError("missing key 'omegas' (or 'thetas_deg')");
  }
  c.snr_db = number_or_inf(j, "snr_db");
  c.delta_nu_db = optional_key<double>(j, "delta_nu_db", 0.0);
  try {
    c.noise_case = parse_noise_case(require<std::string>(j, "noise_case"));
  } catch (const ParseError&) {
    throw;
  } catch (const Error&) {
    throw ParseError("bad value for key 'noise_case'");
  }
  if (j.contains("amplitude")) {
    const json& a = j.at("amplitude");
    c.amplitude_law.magnitude_mean = optional_key<double>(a, "mean", 1.0);
    c.amplitude_law.magnitude_std = optional_key<double>(a, "std", 0.2);
  }
  c.seed = optional_key<std::uint64_t>(j, "seed", 0);
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json j;
  j["M"] = c.M;
  j["L"] = c.L;
  j["omegas"] = c.true_omegas;
  if (std::isinf(c.snr_db))
    j["snr_db"] = "inf";
  else
    j["snr_db"] = c.snr_db;
  j["delta_nu_db"] = c.delta_nu_db;
  j["noise_case"] = std::string(to_string(c.noise_case));
  j["amplitude"] = {{"mean", c.amplitude_law.magnitude_mean},
                    {"std", c.amplitude_law.magnitude_std}};
  j["seed"] = c.seed;
  return j;
}

json scene_to_json(const ScenarioConfig& config, const SyntheticScene& scene) {
  json j;
  j["config"] = scenario_to_json(config);
  j["omegas"] = scene.omegas;
  j["weights_re"] = matrix_json(scene.weights.real());
  j["weights_im"] = matrix_json(scene.weights.imag());
  j["noise_variances"] = matrix_json(scene.noise_variances);
  return j;
}

SceneFile scene_from_json(const json& j) {
  SceneFile f;
  if (!j.contains("config")) throw ParseError("missing key 'config'");
  f.config = scenario_from_json(j.at("config"));
  f.scene.omegas = require<std::vector<double>>(j, "omegas");
  const auto K = static_cast<Eigen::Index>(f.scene.omegas.size());
  const RMatrix re = matrix_from_json(j, "weights_re", K, f.config.L);
  const RMatrix im = matrix_from_json(j, "weights_im", K, f.config.L);
  f.scene.weights.resize(K, f.config.L);
  f.scene.weights.real() = re;
  f.scene.weights.imag() = im;
  f.scene.noise_variances = matrix_from_json(j, "noise_variances", f.config.M, f.config.L);
  f.scene.clean_signal = steering_matrix(f.scene.omegas, f.config.M) * f.scene.weights;
  return f;
}

json result_to_json(const EstimationResult& r) {
  json j;
  j["algorithm"] = std::string(algorithm_name(r.noise_case));
  j["noise_case"] = std::string(to_string(r.noise_case));
  j["K_hat"] = r.K_hat;
  j["components"] = r.components;
  j["omegas"] = r.omegas;
  json thetas = json::array(), kappas = json::array();
  for (const auto& vm : r.posteriors) {
    thetas.push_back(omega_to_theta(wrap_angle(vm.mu)));
    kappas.push_back(vm.kappa);
  }
  j["thetas_deg"] = thetas;
  j["kappas"] = kappas;
  j["weights_re"] = matrix_json(r.weights.real());
  j["weights_im"] = matrix_json(r.weights.imag());
  j["noise"] = std::vector<double>(r.noise.values().begin(), r.noise.values().end());
  j["rho"] = r.hyper.rho;
  j["tau"] = r.hyper.tau;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  return j;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

} // namespace gdoa
