#include "mem2seq/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "mem2seq/trainer.hpp"

namespace m2s {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void check_vocab(const MemorySequence& memory, const Vocab& vocab) {
  for (std::size_t i = 0; i < memory.size(); ++i) {
    for (std::size_t id : memory.cells[i].symbols) {
      if (id >= vocab.size()) {
        throw std::invalid_argument("memory cell " + std::to_string(i) + " holds symbol id " + std::to_string(id) +
                                    " outside the model vocabulary of " + std::to_string(vocab.size()));
      }
    }
  }
}

}  // namespace

AttentionTrace trace_attention(const Mem2Seq& model, const MemorySequence& memory) {
  check_vocab(memory, model.vocab());
  AttentionTrace trace;
  trace.sentinel_index = memory.sentinel_index();
  for (const MemoryCell& cell : memory.cells) trace.cell_labels.push_back(cell_label(cell, model.vocab()));
  DecodeResult decoded = model.decode(memory);
  for (DecodeStep& s : decoded.steps) {
    TraceStep step;
    step.word = s.token.word;
    step.from_vocab = !s.token.copied;
    step.pointer_index = s.token.pointer_index;
    step.attention = std::move(s.attention);
    step.query = std::move(s.query);
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

AttentionTrace trace_attention(const Mem2Seq& model, const DialogSample& sample) {
  return trace_attention(model, build_memory(sample, model.vocab()));
}

void write_attention_tsv(std::ostream& out, const AttentionTrace& trace) {
  out << "cell";
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    out << '\t' << (t + 1) << ':' << trace.steps[t].word << (trace.steps[t].from_vocab ? "|vocab" : "|copy");
  }
  out << '\n';
  for (std::size_t i = 0; i < trace.cell_labels.size(); ++i) {
    out << trace.cell_labels[i];
    for (const TraceStep& s : trace.steps) out << '\t' << fmt("%.6f", s.attention.back().at(i));
    out << '\n';
  }
}

PcaResult pca_project(const std::vector<std::vector<double>>& vectors, const std::vector<std::string>& labels) {
  if (vectors.size() != labels.size()) {
    throw std::invalid_argument("PCA got " + std::to_string(vectors.size()) + " vectors but " +
                                std::to_string(labels.size()) + " labels");
  }
  if (vectors.size() < 2) throw std::invalid_argument("PCA needs at least 2 vectors");
  const std::size_t d = vectors.front().size();
  if (d < 2) throw std::invalid_argument("PCA needs at least 2 dimensions");
  for (const auto& v : vectors) {
    if (v.size() != d) throw std::invalid_argument("PCA vectors differ in dimension");
  }
  if (std::all_of(vectors.begin(), vectors.end(), [&](const auto& v) { return v == vectors.front(); })) {
    throw std::invalid_argument("PCA needs at least 2 distinct points");
  }

  const std::size_t n = vectors.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("PCA eigen-decomposition failed");

  PcaResult out;
  out.mean.assign(mean.data(), mean.data() + d);
  const Eigen::Index last = static_cast<Eigen::Index>(d) - 1;
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd c = solver.eigenvectors().col(last - k);
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      if (std::abs(c(j)) > 1e-12) {
        if (c(j) < 0) c = -c;
        break;
      }
    }
    out.components[k].assign(c.data(), c.data() + d);
    out.variances[k] = std::max(0.0, solver.eigenvalues()(last - k));
  }
  for (std::size_t i = 0; i < n; ++i) {
    PcaPoint p;
    for (std::size_t j = 0; j < d; ++j) {
      const double centered = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      p.x += centered * out.components[0][j];
      p.y += centered * out.components[1][j];
    }
    p.label = labels[i];
    out.points.push_back(std::move(p));
  }
  return out;
}

double orthonormality_error(const PcaResult& pca) {
  double worst = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      double dot = 0.0;
      for (std::size_t j = 0; j < pca.components[a].size(); ++j) dot += pca.components[a][j] * pca.components[b][j];
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

void write_pca(std::ostream& out, const PcaResult& pca) {
  const double err = orthonormality_error(pca);
  if (err > 1e-10) throw std::logic_error("PCA components are not orthonormal (error " + fmt("%.3g", err) + ")");
  nlohmann::ordered_json j;
  j["components"] = pca.components;
  j["variances"] = pca.variances;
  j["mean"] = pca.mean;
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (const PcaPoint& p : pca.points) points.push_back({{"x", p.x}, {"y", p.y}, {"label", p.label}});
  j["points"] = std::move(points);
  out << j.dump(1) << '\n';
}

void collect_queries(const Mem2Seq& model, const DatasetSplit& split, std::vector<std::vector<double>>& vectors,
                     std::vector<std::string>& labels) {
  for (const DialogSample& sample : split.samples) {
    DecodeResult decoded = model.decode(build_memory(sample, model.vocab()));
    for (DecodeStep& s : decoded.steps) {
      vectors.push_back(std::move(s.query));
      labels.emplace_back(s.token.copied ? kLabelPointer : kLabelVocab);
    }
  }
}

double TimingRow::mean_minutes() const {
  if (epoch_seconds.empty()) return 0.0;
  return std::accumulate(epoch_seconds.begin(), epoch_seconds.end(), 0.0) /
         static_cast<double>(epoch_seconds.size()) / 60.0;
}

std::string TimingReport::text() const {
  std::string out = "# wall-clock minutes per epoch on this machine\n";
  char line[160];
  std::snprintf(line, sizeof line, "%6s %6s %8s %8s %12s\n", "hops", "dim", "samples", "max_len", "min/epoch");
  out += line;
  for (const TimingRow& r : rows) {
    std::snprintf(line, sizeof line, "%6zu %6zu %8zu %8zu %12.4f\n", r.hops, r.dim, r.samples, r.max_input_length,
                  r.mean_minutes());
    out += line;
  }
  return out;
}

std::string TimingReport::records() const {
  std::string out = "hops\tdim\tsamples\tmax_len\tepoch\tseconds\n";
  for (const TimingRow& r : rows) {
    for (std::size_t e = 0; e < r.epoch_seconds.size(); ++e) {
      out += std::to_string(r.hops) + '\t' + std::to_string(r.dim) + '\t' + std::to_string(r.samples) + '\t' +
             std::to_string(r.max_input_length) + '\t' + std::to_string(e + 1) + '\t' +
             fmt("%.6f", r.epoch_seconds[e]) + '\n';
    }
  }
  return out;
}

TimingReport timing_report(const std::vector<TrainConfig>& configs, const DatasetSplit& data, std::size_t epochs) {
  TimingReport report;
  if (data.samples.empty() || epochs == 0) return report;
  const Vocab vocab = build_vocab(data);
  const std::vector<Example> examples = make_examples(data, vocab);
  std::size_t max_len = 0;
  for (const Example& ex : examples) max_len = std::max(max_len, ex.memory.size());
  for (const TrainConfig& config : configs) {
    Mem2Seq model(vocab, config.model, config.seed);
    Trainer trainer(model, config, Rng(config.seed).fork(1));
    TimingRow row{config.model.hops, config.model.dim, examples.size(), max_len, {}};
    for (std::size_t e = 0; e < epochs; ++e) {
      const auto start = std::chrono::steady_clock::now();
      for (std::size_t b = 0; b < examples.size(); b += config.batch_size) {
        const std::size_t len = std::min(config.batch_size, examples.size() - b);
        trainer.step(std::span<const Example>(examples).subspan(b, len));
      }
      row.epoch_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace m2s
