#include "mnlpm/network.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mnlpm/random.hpp"

namespace mnlpm {

MultilayerNetwork::MultilayerNetwork(int n_actors, int n_layers) : n_actors_(n_actors) {
  if (n_actors <= 0 || n_layers <= 0)
    throw std::invalid_argument("network needs at least one actor and one layer");
  adjacency_.assign(n_layers, BinaryMatrix::Zero(n_actors, n_actors));
  mask_.assign(n_layers, BinaryMatrix::Ones(n_actors, n_actors));
  actors_.resize(n_actors);
  for (int i = 0; i < n_actors; ++i) actors_[i].label = std::to_string(i + 1);
  layer_labels_.resize(n_layers);
  for (int j = 0; j < n_layers; ++j) layer_labels_[j] = std::to_string(j + 1);
}

MultilayerNetwork MultilayerNetwork::from_layers(std::vector<BinaryMatrix> adjacency,
                                                 std::vector<BinaryMatrix> mask) {
  if (adjacency.empty()) throw std::invalid_argument("from_layers: no layers");
  const int n = static_cast<int>(adjacency.front().rows());
  MultilayerNetwork net(n, static_cast<int>(adjacency.size()));
  for (const auto& a : adjacency)
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("from_layers: shape mismatch");
  net.adjacency_ = std::move(adjacency);
  if (!mask.empty()) {
    if (mask.size() != net.adjacency_.size())
      throw std::invalid_argument("from_layers: mask layer count mismatch");
    net.mask_ = std::move(mask);
  }
  return net;
}

void MultilayerNetwork::set_edge(int i, int ip, int j, bool value) {
  adjacency_[j](i, ip) = value;
  adjacency_[j](ip, i) = value;
}

void MultilayerNetwork::set_observed(int i, int ip, int j, bool value) {
  mask_[j](i, ip) = value;
  mask_[j](ip, i) = value;
}

long MultilayerNetwork::layer_edges(int j) const {
  long count = 0;
  for (int i = 0; i < n_actors_; ++i)
    for (int ip = i + 1; ip < n_actors_; ++ip) count += edge(i, ip, j);
  return count;
}

long MultilayerNetwork::total_edges() const {
  long count = 0;
  for (int j = 0; j < n_layers(); ++j) count += layer_edges(j);
  return count;
}

long MultilayerNetwork::observed_triples() const {
  long count = 0;
  for (int j = 0; j < n_layers(); ++j)
    for (int i = 0; i < n_actors_; ++i)
      for (int ip = i + 1; ip < n_actors_; ++ip) count += observed(i, ip, j);
  return count;
}

bool operator==(const MultilayerNetwork& a, const MultilayerNetwork& b) {
  return a.n_actors_ == b.n_actors_ && a.adjacency_ == b.adjacency_ && a.mask_ == b.mask_ &&
         a.actors_ == b.actors_ && a.layer_labels_ == b.layer_labels_;
}

NetworkFormat parse_network_format(const std::string& name) {
  if (name == "edge-list" || name == "edgelist") return NetworkFormat::edge_list;
  if (name == "adjacency-matrix" || name == "adjacency") return NetworkFormat::adjacency_matrix;
  throw std::invalid_argument("unknown network format '" + name + "'");
}

std::vector<Violation> validate(const MultilayerNetwork& net) {
  std::vector<Violation> out;
  const int n = net.n_actors();
  for (int j = 0; j < net.n_layers(); ++j) {
    const auto& y = net.layer(j);
    const auto& m = net.layer_mask(j);
    for (int i = 0; i < n; ++i) {
      if (y(i, i) != 0) out.push_back({{i, i, j}, "nonzero diagonal entry"});
      for (int ip = 0; ip < n; ++ip) {
        if (y(i, ip) > 1) out.push_back({{i, ip, j}, "entry is not binary"});
        if (ip > i && y(i, ip) != y(ip, i)) out.push_back({{i, ip, j}, "asymmetric adjacency"});
        if (ip > i && (m(i, ip) != 0) != (m(ip, i) != 0))
          out.push_back({{i, ip, j}, "asymmetric mask"});
      }
    }
  }
  return out;
}

namespace {

struct LineReader {
  std::istream& in;
  int number = 0;

  // Next line that is neither blank nor a % comment.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++number;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '%') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("line " + std::to_string(number) + ": " + what);
  }
};

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

int parse_int(const LineReader& reader, const std::string& tok) {
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(tok, &pos);
  } catch (const std::exception&) {
    reader.fail("expected an integer, got '" + tok + "'");
  }
  if (pos != tok.size()) reader.fail("expected an integer, got '" + tok + "'");
  return value;
}

std::pair<int, int> parse_header(LineReader& reader) {
  std::string line;
  if (!reader.next(line)) reader.fail("missing 'I J' header");
  const auto tok = tokens(line);
  if (tok.size() != 2 || tok[0] == "#") reader.fail("header must be 'I J'");
  const int n_actors = parse_int(reader, tok[0]);
  const int n_layers = parse_int(reader, tok[1]);
  if (n_actors <= 0 || n_layers <= 0) reader.fail("header counts must be positive");
  return {n_actors, n_layers};
}

void throw_if_invalid(const MultilayerNetwork& net) {
  const auto v = validate(net);
  if (v.empty()) return;
  const auto& w = v.front().where;
  throw DataError("validation error: " + v.front().what + " at (" + std::to_string(w.j + 1) +
                  ", " + std::to_string(w.i + 1) + ", " + std::to_string(w.ip + 1) + ")");
}

// Shared by edge lists and mask files. Calls on_triple(i, ip, j, value) with
// 0-based indices for every data line.
template <typename OnTriple, typename OnDirective>
void read_triples(LineReader& reader, int n_actors, int n_layers, OnTriple on_triple,
                  OnDirective on_directive) {
  std::string line;
  while (reader.next(line)) {
    const auto tok = tokens(line);
    if (tok.front()[0] == '#') {
      if (tok.front() == "#") on_directive(tok);
      continue;
    }
    if (tok.size() != 3 && tok.size() != 4) reader.fail("data line must be 'j i i' [0|1]'");
    const int j = parse_int(reader, tok[0]);
    const int i = parse_int(reader, tok[1]);
    const int ip = parse_int(reader, tok[2]);
    int value = 1;
    if (tok.size() == 4) {
      value = parse_int(reader, tok[3]);
      if (value != 0 && value != 1) reader.fail("edge value must be 0 or 1");
    }
    if (j < 1 || j > n_layers) reader.fail("layer index out of range");
    if (i < 1 || i > n_actors || ip < 1 || ip > n_actors) reader.fail("actor index out of range");
    on_triple(i - 1, ip - 1, j - 1, value);
  }
}

}  // namespace

MultilayerNetwork parse_edge_list(std::istream& in) {
  LineReader reader{in};
  const auto [n_actors, n_layers] = parse_header(reader);
  MultilayerNetwork net(n_actors, n_layers);
  // 0 = unstated, 1 = asserted present, 2 = asserted absent
  std::vector<BinaryMatrix> asserted(n_layers, BinaryMatrix::Zero(n_actors, n_actors));

  auto on_triple = [&](int i, int ip, int j, int value) {
    if (i == ip) {
      if (value == 1) reader.fail("validation error: nonzero diagonal entry");
      return;
    }
    const std::uint8_t state = value == 1 ? 1 : 2;
    auto& a = asserted[j](std::min(i, ip), std::max(i, ip));
    if (a != 0 && a != state) reader.fail("conflicting entries for the same dyad");
    a = state;
    if (value == 1) net.set_edge(i, ip, j, true);
  };
  auto on_directive = [&](const std::vector<std::string>& tok) {
    // "# actor <i> <label> [key=value ...]" and "# layer <j> <label>"
    const auto& t = tok;
    if (t.size() >= 4 && t[1] == "actor") {
      const int i = parse_int(reader, t[2]);
      if (i < 1 || i > n_actors) reader.fail("actor index out of range");
      ActorInfo info{t[3], {}};
      for (std::size_t k = 4; k < t.size(); ++k) {
        const auto eq = t[k].find('=');
        if (eq == std::string::npos) reader.fail("actor attribute must be key=value");
        info.attributes[t[k].substr(0, eq)] = t[k].substr(eq + 1);
      }
      net.actors()[i - 1] = std::move(info);
    } else if (t.size() >= 4 && t[1] == "layer") {
      const int j = parse_int(reader, t[2]);
      if (j < 1 || j > n_layers) reader.fail("layer index out of range");
      net.layer_labels()[j - 1] = t[3];
    }
  };
  read_triples(reader, n_actors, n_layers, on_triple, on_directive);
  return net;
}

MultilayerNetwork parse_adjacency(std::istream& in) {
  LineReader reader{in};
  const auto [n_actors, n_layers] = parse_header(reader);
  std::vector<BinaryMatrix> layers(n_layers, BinaryMatrix::Zero(n_actors, n_actors));
  std::string line;
  for (int j = 0; j < n_layers; ++j) {
    for (int i = 0; i < n_actors; ++i) {
      if (!reader.next(line)) reader.fail("unexpected end of adjacency data");
      const auto tok = tokens(line);
      if (static_cast<int>(tok.size()) != n_actors)
        reader.fail("adjacency row must have " + std::to_string(n_actors) + " entries");
      for (int ip = 0; ip < n_actors; ++ip) {
        const int v = parse_int(reader, tok[ip]);
        if (v != 0 && v != 1) reader.fail("adjacency entries must be 0 or 1");
        layers[j](i, ip) = static_cast<std::uint8_t>(v);
      }
    }
  }
  if (reader.next(line)) reader.fail("trailing data after last adjacency block");
  auto net = MultilayerNetwork::from_layers(std::move(layers));
  throw_if_invalid(net);
  return net;
}

MultilayerNetwork load_network(const std::filesystem::path& path, NetworkFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open network file " + path.string());
  try {
    return format == NetworkFormat::edge_list ? parse_edge_list(in) : parse_adjacency(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

// Default labels and empty attribute sets are implied and not written.
void write_labels(std::ostream& out, const MultilayerNetwork& net) {
  for (int i = 0; i < net.n_actors(); ++i) {
    const auto& a = net.actors()[i];
    if (a.label == std::to_string(i + 1) && a.attributes.empty()) continue;
    out << "# actor " << i + 1 << ' ' << a.label;
    for (const auto& [k, v] : a.attributes) out << ' ' << k << '=' << v;
    out << '\n';
  }
  for (int j = 0; j < net.n_layers(); ++j)
    if (net.layer_labels()[j] != std::to_string(j + 1))
      out << "# layer " << j + 1 << ' ' << net.layer_labels()[j] << '\n';
}

}  // namespace

void write_edge_list(std::ostream& out, const MultilayerNetwork& net) {
  out << net.n_actors() << ' ' << net.n_layers() << '\n';
  write_labels(out, net);
  for (int j = 0; j < net.n_layers(); ++j)
    for (int i = 0; i < net.n_actors(); ++i)
      for (int ip = i + 1; ip < net.n_actors(); ++ip)
        if (net.edge(i, ip, j)) out << j + 1 << ' ' << i + 1 << ' ' << ip + 1 << '\n';
}

void write_adjacency(std::ostream& out, const MultilayerNetwork& net) {
  out << net.n_actors() << ' ' << net.n_layers() << '\n';
  for (int j = 0; j < net.n_layers(); ++j) {
    if (j > 0) out << '\n';
    for (int i = 0; i < net.n_actors(); ++i) {
      for (int ip = 0; ip < net.n_actors(); ++ip)
        out << (ip ? " " : "") << static_cast<int>(net.layer(j)(i, ip));
      out << '\n';
    }
  }
}

void save_network(const MultilayerNetwork& net, const std::filesystem::path& path,
                  NetworkFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write network file " + path.string());
  if (format == NetworkFormat::edge_list)
    write_edge_list(out, net);
  else
    write_adjacency(out, net);
}

MultilayerNetwork apply_mask_file(const MultilayerNetwork& net, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mask file " + path.string());
  LineReader reader{in};
  const auto [n_actors, n_layers] = parse_header(reader);
  if (n_actors != net.n_actors() || n_layers != net.n_layers())
    reader.fail("mask header does not match the network dimensions");
  MultilayerNetwork out = net;
  read_triples(
      reader, n_actors, n_layers,
      [&](int i, int ip, int j, int value) {
        if (i == ip) reader.fail("mask cannot list a diagonal entry");
        if (value == 1) out.set_observed(i, ip, j, false);
      },
      [](const std::vector<std::string>&) {});
  return out;
}

void write_mask(std::ostream& out, const MultilayerNetwork& net) {
  out << net.n_actors() << ' ' << net.n_layers() << '\n';
  for (int j = 0; j < net.n_layers(); ++j)
    for (int i = 0; i < net.n_actors(); ++i)
      for (int ip = i + 1; ip < net.n_actors(); ++ip)
        if (!net.observed(i, ip, j)) out << j + 1 << ' ' << i + 1 << ' ' << ip + 1 << '\n';
}

MultilayerNetwork erdos_renyi(int n_actors, int n_layers, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must lie in [0, 1]");
  MultilayerNetwork net(n_actors, n_layers);
  Rng rng(seed);
  for (int j = 0; j < n_layers; ++j)
    for (int i = 0; i < n_actors; ++i)
      for (int ip = i + 1; ip < n_actors; ++ip)
        if (rng.bernoulli(p)) net.set_edge(i, ip, j, true);
  return net;
}

long FoldAssignment::fold_size(int f) const { return std::count(fold.begin(), fold.end(), f); }

std::vector<Triple> FoldAssignment::fold_triples(int f) const {
  std::vector<Triple> out;
  for (std::size_t t = 0; t < triples.size(); ++t)
    if (fold[t] == f) out.push_back(triples[t]);
  return out;
}

FoldAssignment make_folds(const MultilayerNetwork& net, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw std::invalid_argument("need at least 2 folds");
  FoldAssignment out;
  out.n_folds = n_folds;
  for (int j = 0; j < net.n_layers(); ++j)
    for (int i = 0; i < net.n_actors(); ++i)
      for (int ip = i + 1; ip < net.n_actors(); ++ip)
        if (net.observed(i, ip, j)) out.triples.push_back({i, ip, j});
  if (static_cast<long>(out.triples.size()) < n_folds)
    throw std::invalid_argument("too few observed dyads for " + std::to_string(n_folds) + " folds");

  std::vector<std::size_t> order(out.triples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with our own bounded draws so the permutation does not
  // depend on the standard library's uniform_int_distribution.
  for (std::size_t k = order.size(); k > 1; --k) {
    const auto r = static_cast<std::size_t>(rng.uniform() * static_cast<double>(k));
    std::swap(order[k - 1], order[std::min(r, k - 1)]);
  }
  out.fold.assign(out.triples.size(), 0);
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    out.fold[order[rank]] = static_cast<int>(rank % n_folds);
  return out;
}

MultilayerNetwork apply_fold_mask(const MultilayerNetwork& net, const FoldAssignment& folds,
                                  int held_out) {
  if (held_out < 0 || held_out >= folds.n_folds) throw std::invalid_argument("fold out of range");
  MultilayerNetwork out = net;
  for (std::size_t t = 0; t < folds.triples.size(); ++t)
    if (folds.fold[t] == held_out) {
      const auto& tr = folds.triples[t];
      out.set_observed(tr.i, tr.ip, tr.j, false);
    }
  return out;
}

MultilayerNetwork permute(const MultilayerNetwork& net, const std::vector<int>& actor_perm,
                          const std::vector<int>& layer_perm) {
  const int n = net.n_actors();
  const int n_layers = net.n_layers();
  MultilayerNetwork out(n, n_layers);
  for (int j = 0; j < n_layers; ++j) {
    const int oj = layer_perm[j];
    out.layer_labels()[j] = net.layer_labels()[oj];
    for (int i = 0; i < n; ++i)
      for (int ip = i + 1; ip < n; ++ip) {
        const int oi = actor_perm[i], oip = actor_perm[ip];
        out.set_edge(i, ip, j, net.edge(oi, oip, oj));
        out.set_observed(i, ip, j, net.observed(oi, oip, oj));
      }
  }
  for (int i = 0; i < n; ++i) out.actors()[i] = net.actors()[actor_perm[i]];
  return out;
}

}  // namespace mnlpm
