#pragma once

#include <filesystem>
#include <iosfwd>

#include "mnlpm/sampler.hpp"

namespace mnlpm {

/// samples.bin layout, all little-endian:
///
///   char[8]  magic "MNLPMS01"
///   uint32   format version (1)
///   uint32   variant tag (0 MNLPM, 1 IFLPM, 2 GMLPM)
///   int32    I, J, K, L   (L = position layers: J, or 1 for GMLPM)
///   int64    B
///   B records of float64, each
///     zeta[J], theta[J], u[L][I][K], eta[I][K], sigma2, mu_zeta, tau2_zeta,
///     mu_theta, tau2_theta, nu[K], kappa2
inline constexpr char kSamplesMagic[8] = {'M', 'N', 'L', 'P', 'M', 'S', '0', '1'};
inline constexpr std::uint32_t kSamplesVersion = 1;

/// Number of float64 values in one record.
long record_length(int I, int J, int K, int L);

void write_state_record(std::ostream& out, const ParameterState& s);
ParameterState read_state_record(std::istream& in, int I, int J, int K, int L);

void write_samples_bin(std::ostream& out, const PosteriorSamples& samples);
/// Reads states and the variant tag; throws DataError on a malformed file.
PosteriorSamples read_samples_bin(std::istream& in);

/// Writes samples.bin, loglik.csv (iteration,loglik), accept.csv
/// (block,proposed,accepted,rate,step) and config.json ({"fit", "hyper"}).
void save_samples(const PosteriorSamples& samples, const std::filesystem::path& dir);
PosteriorSamples load_samples(const std::filesystem::path& dir);

/// Checkpoint file: magic "MNLPMC01", a length-prefixed JSON header, then
/// the current state and the retained records. Written via rename so a
/// crash never leaves a truncated checkpoint.
void save_checkpoint(const ChainSnapshot& snapshot, const std::filesystem::path& path);
ChainSnapshot load_checkpoint(const std::filesystem::path& path);

}  // namespace mnlpm
