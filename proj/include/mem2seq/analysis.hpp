#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mem2seq/config.hpp"
#include "mem2seq/corpus.hpp"
#include "mem2seq/model.hpp"

namespace m2s {

struct TraceStep {
  std::string word;
  /// True when the pointer chose the sentinel and the word came from P_vocab.
  bool from_vocab = false;
  /// argmax of the last-hop attention.
  std::size_t pointer_index = 0;
  /// p^1..p^K over the memory cells.
  std::vector<std::vector<double>> attention;
  /// Decoder query h_t.
  std::vector<double> query;
};

/// Greedy decode of one memory with every hop's attention recorded. One
/// step per emitted word; the terminating EOS is not a step.
struct AttentionTrace {
  std::vector<std::string> cell_labels;
  std::size_t sentinel_index = 0;
  std::vector<TraceStep> steps;
};

/// Throws std::invalid_argument when a memory symbol lies outside the
/// model vocabulary.
AttentionTrace trace_attention(const Mem2Seq& model, const MemorySequence& memory);
AttentionTrace trace_attention(const Mem2Seq& model, const DialogSample& sample);

/// Heatmap data: one row per memory cell, one column per step, each entry
/// the last-hop weight. The header names each step's emitted word.
void write_attention_tsv(std::ostream& out, const AttentionTrace& trace);

struct PcaPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

struct PcaResult {
  /// Rows are unit principal directions, largest variance first; the first
  /// coordinate of magnitude above 1e-12 is positive.
  std::array<std::vector<double>, 2> components;
  /// Sample variances (n - 1 denominator) along each component.
  std::array<double, 2> variances{};
  std::vector<double> mean;
  std::vector<PcaPoint> points;
};

/// Projects mean-centered vectors onto the top two covariance eigenvectors.
/// Needs at least two distinct vectors of at least two dimensions.
PcaResult pca_project(const std::vector<std::vector<double>>& vectors, const std::vector<std::string>& labels);

/// Largest |C·Cᵀ - I| entry.
double orthonormality_error(const PcaResult& pca);

/// JSON record of components, variances and labeled points. Throws
/// std::logic_error if the components are not orthonormal within 1e-10.
void write_pca(std::ostream& out, const PcaResult& pca);

inline constexpr const char* kLabelVocab = "vocab";
inline constexpr const char* kLabelPointer = "pointer";

/// Query vectors of every decode step over a split, labeled by the gate
/// decision taken at that step.
void collect_queries(const Mem2Seq& model, const DatasetSplit& split, std::vector<std::vector<double>>& vectors,
                     std::vector<std::string>& labels);

struct TimingRow {
  std::size_t hops = 0;
  std::size_t dim = 0;
  std::size_t samples = 0;
  /// Longest memory (cells) among the samples.
  std::size_t max_input_length = 0;
  std::vector<double> epoch_seconds;

  double mean_minutes() const;
};

struct TimingReport {
  std::vector<TimingRow> rows;

  /// Aligned table, headed by a note that times are local wall clock.
  std::string text() const;
  /// Tab-separated rows `hops dim samples max_len epoch seconds`.
  std::string records() const;
};

/// Trains a fresh model per config for `epochs` epochs over `data` (no
/// validation) and records wall-clock seconds per epoch.
TimingReport timing_report(const std::vector<TrainConfig>& configs, const DatasetSplit& data, std::size_t epochs);

}  // namespace m2s
