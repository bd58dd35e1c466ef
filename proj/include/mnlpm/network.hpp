#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mnlpm {

/// Malformed or invalid input data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct Triple {
  int i = 0;   // actor, 0-based, i < ip for canonical triples
  int ip = 0;  // actor, 0-based
  int j = 0;   // layer, 0-based
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct Violation {
  Triple where;
  std::string what;
};

struct ActorInfo {
  std::string label;
  std::map<std::string, std::string> attributes;
  friend bool operator==(const ActorInfo&, const ActorInfo&) = default;
};

/// I actors x J layers of undirected binary relations with a structural-zero
/// diagonal. mask(i, ip, j) is true when the dyad is observed.
class MultilayerNetwork {
 public:
  MultilayerNetwork() = default;
  /// Empty, fully observed network with default labels "1".."I" / "1".."J".
  MultilayerNetwork(int n_actors, int n_layers);

  /// Raw constructor: takes the tensors as given, without validation.
  static MultilayerNetwork from_layers(std::vector<BinaryMatrix> adjacency,
                                       std::vector<BinaryMatrix> mask = {});

  int n_actors() const { return n_actors_; }
  int n_layers() const { return static_cast<int>(adjacency_.size()); }

  bool edge(int i, int ip, int j) const { return adjacency_[j](i, ip) != 0; }
  bool observed(int i, int ip, int j) const { return mask_[j](i, ip) != 0; }
  const BinaryMatrix& layer(int j) const { return adjacency_[j]; }
  const BinaryMatrix& layer_mask(int j) const { return mask_[j]; }

  /// Symmetric setters (both orientations).
  void set_edge(int i, int ip, int j, bool value);
  void set_observed(int i, int ip, int j, bool value);

  std::vector<ActorInfo>& actors() { return actors_; }
  const std::vector<ActorInfo>& actors() const { return actors_; }
  std::vector<std::string>& layer_labels() { return layer_labels_; }
  const std::vector<std::string>& layer_labels() const { return layer_labels_; }

  /// Number of edges over all layers (unordered pairs).
  long total_edges() const;
  long layer_edges(int j) const;
  /// Observed unordered off-diagonal triples.
  long observed_triples() const;

  friend bool operator==(const MultilayerNetwork&, const MultilayerNetwork&);

 private:
  int n_actors_ = 0;
  std::vector<BinaryMatrix> adjacency_;
  std::vector<BinaryMatrix> mask_;
  std::vector<ActorInfo> actors_;
  std::vector<std::string> layer_labels_;
};

enum class NetworkFormat { edge_list, adjacency_matrix };

NetworkFormat parse_network_format(const std::string& name);

/// Returns an empty list iff the diagonal is zero, y and mask are symmetric,
/// and every entry is 0/1.
std::vector<Violation> validate(const MultilayerNetwork& net);

/// Parsers throw DataError with the offending line number.
MultilayerNetwork parse_edge_list(std::istream& in);
MultilayerNetwork parse_adjacency(std::istream& in);
MultilayerNetwork load_network(const std::filesystem::path& path, NetworkFormat format);

void write_edge_list(std::ostream& out, const MultilayerNetwork& net);
void write_adjacency(std::ostream& out, const MultilayerNetwork& net);
void save_network(const MultilayerNetwork& net, const std::filesystem::path& path,
                  NetworkFormat format);

/// Mask files use the edge-list grammar and list the MISSING triples.
MultilayerNetwork apply_mask_file(const MultilayerNetwork& net, const std::filesystem::path& path);
void write_mask(std::ostream& out, const MultilayerNetwork& net);

MultilayerNetwork erdos_renyi(int n_actors, int n_layers, double p, std::uint64_t seed);

struct FoldAssignment {
  int n_folds = 0;
  std::vector<Triple> triples;  // canonical (i < ip) observed triples
  std::vector<int> fold;        // fold index per triple, 0-based

  long fold_size(int f) const;
  std::vector<Triple> fold_triples(int f) const;
};

FoldAssignment make_folds(const MultilayerNetwork& net, int n_folds, std::uint64_t seed);

/// Copy of `net` whose mask is false exactly on fold `held_out` (0-based).
MultilayerNetwork apply_fold_mask(const MultilayerNetwork& net, const FoldAssignment& folds,
                                  int held_out);

/// Reorders actors: new actor k is old actor perm[k]. Layers likewise.
MultilayerNetwork permute(const MultilayerNetwork& net, const std::vector<int>& actor_perm,
                          const std::vector<int>& layer_perm);

}  // namespace mnlpm
