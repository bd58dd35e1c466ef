#include "mnlpm/samples_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mnlpm {

namespace fs = std::filesystem;

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw DataError("unexpected end of binary sample file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename Derived>
void put_row_major(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
}

void get_row_major(std::istream& in, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
}

void get_vector(std::istream& in, Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = get<double>(in);
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(p, mode);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(p, mode);
  if (!in) throw DataError("cannot read " + p.string());
  return in;
}

struct Header {
  Variant variant;
  int I, J, K, L;
  long B;
};

void put_header(std::ostream& out, const Header& h) {
  out.write(kSamplesMagic, sizeof kSamplesMagic);
  put<std::uint32_t>(out, kSamplesVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(h.variant));
  put<std::int32_t>(out, h.I);
  put<std::int32_t>(out, h.J);
  put<std::int32_t>(out, h.K);
  put<std::int32_t>(out, h.L);
  put<std::int64_t>(out, h.B);
}

Header get_header(std::istream& in, const char (&magic)[8]) {
  char m[8];
  if (!in.read(m, 8) || std::memcmp(m, magic, 8) != 0) throw DataError("bad sample file magic");
  if (get<std::uint32_t>(in) != kSamplesVersion) throw DataError("unsupported sample file version");
  const auto tag = get<std::uint32_t>(in);
  if (tag > 2) throw DataError("bad variant tag in sample file");
  Header h;
  h.variant = static_cast<Variant>(tag);
  h.I = get<std::int32_t>(in);
  h.J = get<std::int32_t>(in);
  h.K = get<std::int32_t>(in);
  h.L = get<std::int32_t>(in);
  h.B = get<std::int64_t>(in);
  if (h.I < 1 || h.J < 1 || h.K < 1 || (h.L != h.J && h.L != 1) || h.B < 0)
    throw DataError("bad dimensions in sample file");
  return h;
}

Header header_of(const ParameterState& s, Variant v, long B) {
  return {v, s.n_actors(), s.n_layers(), s.dim(), s.position_layers(), B};
}

}  // namespace

long record_length(int I, int J, int K, int L) {
  return 2L * J + static_cast<long>(L) * I * K + static_cast<long>(I) * K + 5 + K + 1;
}

void write_state_record(std::ostream& out, const ParameterState& s) {
  put_row_major(out, s.zeta.transpose());
  put_row_major(out, s.theta.transpose());
  for (const auto& uj : s.u) put_row_major(out, uj);
  put_row_major(out, s.eta);
  for (double x : {s.sigma2, s.mu_zeta, s.tau2_zeta, s.mu_theta, s.tau2_theta}) put<double>(out, x);
  put_row_major(out, s.nu.transpose());
  put<double>(out, s.kappa2);
}

ParameterState read_state_record(std::istream& in, int I, int J, int K, int L) {
  ParameterState s;
  s.zeta.resize(J);
  s.theta.resize(J);
  get_vector(in, s.zeta);
  get_vector(in, s.theta);
  s.u.assign(L, Eigen::MatrixXd(I, K));
  for (auto& uj : s.u) get_row_major(in, uj);
  s.eta.resize(I, K);
  get_row_major(in, s.eta);
  s.sigma2 = get<double>(in);
  s.mu_zeta = get<double>(in);
  s.tau2_zeta = get<double>(in);
  s.mu_theta = get<double>(in);
  s.tau2_theta = get<double>(in);
  s.nu.resize(K);
  get_vector(in, s.nu);
  s.kappa2 = get<double>(in);
  return s;
}

void write_samples_bin(std::ostream& out, const PosteriorSamples& samples) {
  if (samples.states.empty()) throw std::invalid_argument("no samples to write");
  put_header(out, header_of(samples.states.front(), samples.variant(), samples.size()));
  for (const auto& s : samples.states) write_state_record(out, s);
}

PosteriorSamples read_samples_bin(std::istream& in) {
  const Header h = get_header(in, kSamplesMagic);
  PosteriorSamples out;
  out.config.variant = h.variant;
  out.config.K = h.K;
  out.states.reserve(static_cast<std::size_t>(h.B));
  for (long b = 0; b < h.B; ++b) out.states.push_back(read_state_record(in, h.I, h.J, h.K, h.L));
  return out;
}

void save_samples(const PosteriorSamples& samples, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "samples.bin", std::ios::binary);
    write_samples_bin(out, samples);
  }
  {
    auto out = open_out(dir / "loglik.csv");
    out << "iteration,loglik\n" << std::setprecision(17);
    for (std::size_t b = 0; b < samples.loglik.size(); ++b)
      out << (b < samples.iterations.size() ? samples.iterations[b] : static_cast<long>(b + 1))
          << ',' << samples.loglik[b] << '\n';
  }
  {
    auto out = open_out(dir / "accept.csv");
    out << "block,proposed,accepted,rate,step\n" << std::setprecision(10);
    for (const auto& a : samples.acceptance)
      out << '"' << a.block << "\"," << a.proposed << ',' << a.accepted << ',' << a.rate << ',' << a.step
          << '\n';
  }
  {
    auto out = open_out(dir / "config.json");
    out << nlohmann::json{{"fit", samples.config}, {"hyper", samples.hyper}}.dump(2) << '\n';
  }
}

PosteriorSamples load_samples(const fs::path& dir) {
  PosteriorSamples out;
  {
    auto in = open_in(dir / "samples.bin", std::ios::binary);
    out = read_samples_bin(in);
  }
  {
    auto in = open_in(dir / "config.json");
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError("malformed " + (dir / "config.json").string());
    try {
      const Variant tag = out.config.variant;
      j.at("fit").get_to(out.config);
      j.at("hyper").get_to(out.hyper);
      if (out.config.variant != tag) throw DataError("variant in config.json disagrees with samples.bin");
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed config.json: " + std::string(e.what()));
    }
  }
  {
    auto in = open_in(dir / "loglik.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw DataError("malformed loglik.csv line: " + line);
      out.iterations.push_back(std::stol(line.substr(0, comma)));
      out.loglik.push_back(std::stod(line.substr(comma + 1)));
    }
    if (out.loglik.size() != out.states.size())
      throw DataError("loglik.csv and samples.bin disagree on B");
  }
  if (std::ifstream in(dir / "accept.csv"); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      BlockAcceptance a;
      std::string field;
      if (line.front() == '"') {
        ss.get();
        std::getline(ss, a.block, '"');
        ss.get();
      } else {
        std::getline(ss, a.block, ',');
      }
      std::getline(ss, field, ',');
      a.proposed = std::stol(field);
      std::getline(ss, field, ',');
      a.accepted = std::stol(field);
      std::getline(ss, field, ',');
      a.rate = std::strtod(field.c_str(), nullptr);
      std::getline(ss, field, ',');
      a.step = std::strtod(field.c_str(), nullptr);
      out.acceptance.push_back(a);
    }
  }
  return out;
}

namespace {

constexpr char kCheckpointMagic[8] = {'M', 'N', 'L', 'P', 'M', 'C', '0', '1'};

}  // namespace

void save_checkpoint(const ChainSnapshot& snap, const fs::path& path) {
  nlohmann::json adapters = nlohmann::json::array();
  for (const auto& a : snap.adapters)
    adapters.push_back({a.n_adapt, a.proposed, a.accepted});
  const nlohmann::json header{{"fit", snap.config},
                              {"hyper", snap.hyper},
                              {"iteration", snap.iteration},
                              {"rng_state", snap.rng_state},
                              {"adapters", adapters},
                              {"retained_iterations", snap.retained.iterations}};
  const std::string text = header.dump();

  const fs::path tmp = path.string() + ".tmp";
  {
    auto out = open_out(tmp, std::ios::binary);
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    // Doubles that must survive bit-exactly go in binary.
    put<double>(out, snap.loglik);
    for (const auto& a : snap.adapters) put<double>(out, a.log_step);
    for (double ll : snap.retained.loglik) put<double>(out, ll);
    put_header(out, header_of(snap.state, snap.config.variant,
                              static_cast<long>(snap.retained.states.size())));
    write_state_record(out, snap.state);
    for (const auto& s : snap.retained.states) write_state_record(out, s);
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  fs::rename(tmp, path);
}

ChainSnapshot load_checkpoint(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  char m[8];
  if (!in.read(m, 8) || std::memcmp(m, kCheckpointMagic, 8) != 0)
    throw DataError("bad checkpoint magic in " + path.string());
  const auto len = get<std::uint64_t>(in);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw DataError("truncated checkpoint " + path.string());

  ChainSnapshot snap;
  try {
    const auto j = nlohmann::json::parse(text);
    j.at("fit").get_to(snap.config);
    j.at("hyper").get_to(snap.hyper);
    snap.iteration = j.at("iteration").get<long>();
    snap.rng_state = j.at("rng_state").get<std::array<std::uint64_t, 4>>();
    for (const auto& a : j.at("adapters")) {
      BlockAdapter b;
      b.n_adapt = a.at(0).get<long>();
      b.proposed = a.at(1).get<long>();
      b.accepted = a.at(2).get<long>();
      snap.adapters.push_back(b);
    }
    snap.retained.iterations = j.at("retained_iterations").get<std::vector<long>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint header: " + std::string(e.what()));
  }
  snap.loglik = get<double>(in);
  for (auto& a : snap.adapters) a.log_step = get<double>(in);
  snap.retained.loglik.resize(snap.retained.iterations.size());
  for (auto& ll : snap.retained.loglik) ll = get<double>(in);

  const Header h = get_header(in, kSamplesMagic);
  if (h.B != static_cast<long>(snap.retained.iterations.size()))
    throw DataError("checkpoint sample count mismatch");
  snap.state = read_state_record(in, h.I, h.J, h.K, h.L);
  for (long b = 0; b < h.B; ++b)
    snap.retained.states.push_back(read_state_record(in, h.I, h.J, h.K, h.L));
  snap.retained.config = snap.config;
  snap.retained.hyper = snap.hyper;
  return snap;
}

}  // namespace mnlpm
