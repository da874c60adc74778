// Copyright 2026 The gap-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Persistence and dataset plumbing: CSV/JSON readers and writers for joints,
// mechanisms, datasets, trade-off curves, training histories and trained
// models, plus dataset sampling. Every emitted file starts with a version
// header carrying the seed that produced it; CSV numbers use 12 significant
// digits; writes are atomic (temp file, then rename). Parse failures raise
// FileFormatError with the offending 1-based line.

#ifndef GAPFORGE_IO_HPP_
#define GAPFORGE_IO_HPP_

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gapforge/adversary.hpp"
#include "gapforge/errors.hpp"
#include "gapforge/neural.hpp"
#include "gapforge/probability.hpp"
#include "gapforge/rng.hpp"
#include "gapforge/solver.hpp"
#include "gapforge/trainer.hpp"
#include "gapforge/version.hpp"

namespace gapforge {

// "1.25e-3" -> "0.00125" style shortest %.12g rendering.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string file_header(std::uint64_t seed) {
  return std::string("# gap-forge v") + kVersion + " seed=" +
         std::to_string(seed) + "\n";
}

// Writes to `path + ".tmp"` first and renames into place, so readers never
// observe a half-written file.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("rename of '" + tmp + "' to '" + path + "' failed");
  }
}

namespace detail {

struct CsvLine {
  std::size_t number = 0;  // 1-based
  std::vector<std::string> fields;
};

// Reads a CSV file, dropping '#' comment lines and blank lines but keeping
// true line numbers for error reporting. No quoting: labels must not
// contain commas.
inline std::vector<CsvLine> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError(path, 0, "cannot open file");
  std::vector<CsvLine> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw[0] == '#') continue;
    CsvLine line{number, {}};
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = raw.find(',', start);
      if (comma == std::string::npos) {
        line.fields.push_back(raw.substr(start));
        break;
      }
      line.fields.push_back(raw.substr(start, comma - start));
      start = comma + 1;
    }
    lines.push_back(std::move(line));
  }
  if (lines.empty()) throw FileFormatError(path, number, "no data rows");
  return lines;
}

inline double parse_double(const std::string& path, std::size_t line,
                           const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0')
    throw FileFormatError(path, line, "expected a number, got '" + field + "'");
  return v;
}

inline long parse_long(const std::string& path, std::size_t line,
                       const std::string& field) {
  char* end = nullptr;
  const long v = std::strtol(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0')
    throw FileFormatError(path, line, "expected an integer, got '" + field + "'");
  return v;
}

inline void expect_header(const std::string& path, const CsvLine& line,
                          const std::vector<std::string>& expected) {
  if (line.fields != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i)
      want += (i ? "," : "") + expected[i];
    throw FileFormatError(path, line.number, "expected header '" + want + "'");
  }
}

inline void require_keys(const nlohmann::json& obj,
                         const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || key == a;
    if (!ok) throw Error(where + ": unknown key '" + key + "'");
  }
}

inline nlohmann::json meta_object(std::uint64_t seed) {
  return nlohmann::json{{"format", "gap-forge"}, {"version", kVersion},
                        {"seed", seed}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset sampling.

// n i.i.d. draws from the joint by inverse-CDF over the cells, fully
// determined by the seed.
inline Dataset sample_dataset(const JointDistribution& j, std::size_t n,
                              std::uint64_t seed) {
  if (n == 0) throw Error("sample_dataset: n must be >= 1");
  const std::size_t nx = j.x_alphabet().size();
  const std::size_t ny = j.y_alphabet().size();
  std::vector<double> cdf(nx * ny);
  double acc = 0.0;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      acc += j.p(x, y);
      cdf[x * ny + y] = acc;
    }
  cdf.back() = 1.0;
  Dataset d{j.x_alphabet(), j.y_alphabet(), {}};
  d.rows.reserve(n);
  CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    std::size_t cell = 0;
    while (cell + 1 < cdf.size() && cdf[cell] <= u) ++cell;
    d.rows.emplace_back(static_cast<std::uint32_t>(cell / ny),
                        static_cast<std::uint32_t>(cell % ny));
  }
  return d;
}

inline JointDistribution empirical_joint(const Dataset& d) {
  if (d.rows.empty()) throw Error("empirical_joint: dataset is empty");
  std::vector<std::vector<double>> table(
      d.x_alphabet.size(), std::vector<double>(d.y_alphabet.size(), 0.0));
  const double w = 1.0 / static_cast<double>(d.rows.size());
  for (const auto& [x, y] : d.rows) {
    if (x >= d.x_alphabet.size() || y >= d.y_alphabet.size())
      throw UnknownSymbol("empirical_joint: row index outside alphabets");
    table[x][y] += w;
  }
  return JointDistribution(d.x_alphabet, d.y_alphabet, std::move(table));
}

// ---------------------------------------------------------------------------
// Joint distribution CSV: header "x,y,p", one row per cell.

inline void save_joint_csv(const std::string& path, const JointDistribution& j,
                           std::uint64_t seed) {
  std::string out = file_header(seed) + "x,y,p\n";
  for (std::size_t x = 0; x < j.x_alphabet().size(); ++x)
    for (std::size_t y = 0; y < j.y_alphabet().size(); ++y)
      out += j.x_alphabet().symbol(x) + "," + j.y_alphabet().symbol(y) + "," +
             format_number(j.p(x, y)) + "\n";
  write_atomic(path, out);
}

inline JointDistribution load_joint_csv(const std::string& path) {
  const auto lines = detail::read_csv(path);
  detail::expect_header(path, lines[0], {"x", "y", "p"});
  // Alphabets in first-appearance order; absent cells default to 0.
  std::vector<std::string> xs, ys;
  struct Cell {
    std::string x, y;
    double p;
    std::size_t line;
  };
  std::vector<Cell> cells;
  auto intern = [](std::vector<std::string>& pool, const std::string& s) {
    for (const auto& v : pool)
      if (v == s) return;
    pool.push_back(s);
  };
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.fields.size() != 3)
      throw FileFormatError(path, l.number, "expected 3 fields");
    if (l.fields[0].empty() || l.fields[1].empty())
      throw FileFormatError(path, l.number, "empty symbol label");
    intern(xs, l.fields[0]);
    intern(ys, l.fields[1]);
    cells.push_back(
        {l.fields[0], l.fields[1],
         detail::parse_double(path, l.number, l.fields[2]), l.number});
  }
  try {
    const Alphabet ax(xs), ay(ys);
    std::vector<std::vector<double>> table(xs.size(),
                                           std::vector<double>(ys.size(), 0.0));
    std::vector<std::vector<bool>> seen(xs.size(),
                                        std::vector<bool>(ys.size(), false));
    for (const auto& c : cells) {
      const std::size_t x = ax.index_of(c.x), y = ay.index_of(c.y);
      if (seen[x][y])
        throw FileFormatError(path, c.line,
                              "duplicate cell (" + c.x + "," + c.y + ")");
      seen[x][y] = true;
      table[x][y] = c.p;
    }
    return JointDistribution(ax, ay, std::move(table));
  } catch (const FileFormatError&) {
    throw;
  } catch (const Error& e) {
    throw FileFormatError(path, lines.back().number, e.what());
  }
}

// ---------------------------------------------------------------------------
// Dataset CSV: header "x,y", one row per sample.

inline void save_dataset_csv(const std::string& path, const Dataset& d,
                             std::uint64_t seed) {
  std::string out = file_header(seed) + "x,y\n";
  for (const auto& [x, y] : d.rows)
    out += d.x_alphabet.symbol(x) + "," + d.y_alphabet.symbol(y) + "\n";
  write_atomic(path, out);
}

// Alphabets may be supplied (e.g. from a model) or inferred from the rows in
// first-appearance order.
inline Dataset load_dataset_csv(const std::string& path,
                                const Alphabet* x_alphabet = nullptr,
                                const Alphabet* y_alphabet = nullptr) {
  const auto lines = detail::read_csv(path);
  detail::expect_header(path, lines[0], {"x", "y"});
  if (lines.size() < 2) throw FileFormatError(path, lines[0].number, "no samples");
  Dataset d;
  if (x_alphabet && y_alphabet) {
    d.x_alphabet = *x_alphabet;
    d.y_alphabet = *y_alphabet;
    d.rows.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto& l = lines[i];
      if (l.fields.size() != 2)
        throw FileFormatError(path, l.number, "expected 2 fields");
      const auto x = d.x_alphabet.find(l.fields[0]);
      const auto y = d.y_alphabet.find(l.fields[1]);
      if (!x || !y)
        throw FileFormatError(path, l.number, "symbol outside the alphabet");
      d.rows.emplace_back(static_cast<std::uint32_t>(*x),
                          static_cast<std::uint32_t>(*y));
    }
    return d;
  }
  std::vector<std::string> xs, ys;
  std::vector<std::pair<std::string, std::string>> rows;
  auto intern = [](std::vector<std::string>& pool, const std::string& s) {
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i] == s) return i;
    pool.push_back(s);
    return pool.size() - 1;
  };
  std::vector<std::pair<std::uint32_t, std::uint32_t>> indices;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.fields.size() != 2)
      throw FileFormatError(path, l.number, "expected 2 fields");
    if (l.fields[0].empty() || l.fields[1].empty())
      throw FileFormatError(path, l.number, "empty symbol label");
    indices.emplace_back(static_cast<std::uint32_t>(intern(xs, l.fields[0])),
                         static_cast<std::uint32_t>(intern(ys, l.fields[1])));
  }
  d.x_alphabet = Alphabet(xs);
  d.y_alphabet = Alphabet(ys);
  d.rows = std::move(indices);
  return d;
}

// ---------------------------------------------------------------------------
// Trade-off curve CSV.

inline void save_curve_csv(const std::string& path,
                           const std::vector<TradeoffPoint>& points,
                           std::uint64_t seed) {
  std::string out = file_header(seed) +
                    "budget,leakage_zero_one,leakage_log_bits,"
                    "achieved_distortion,converged\n";
  for (const auto& p : points)
    out += format_number(p.budget) + "," + format_number(p.leakage_zero_one) +
           "," + format_number(p.leakage_log) + "," +
           format_number(p.achieved_distortion) + "," +
           (p.converged ? "1" : "0") + "\n";
  write_atomic(path, out);
}

inline std::vector<TradeoffPoint> load_curve_csv(const std::string& path) {
  const auto lines = detail::read_csv(path);
  detail::expect_header(path, lines[0],
                        {"budget", "leakage_zero_one", "leakage_log_bits",
                         "achieved_distortion", "converged"});
  std::vector<TradeoffPoint> points;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.fields.size() != 5)
      throw FileFormatError(path, l.number, "expected 5 fields");
    TradeoffPoint p;
    p.budget = detail::parse_double(path, l.number, l.fields[0]);
    p.leakage_zero_one = detail::parse_double(path, l.number, l.fields[1]);
    p.leakage_log = detail::parse_double(path, l.number, l.fields[2]);
    p.achieved_distortion = detail::parse_double(path, l.number, l.fields[3]);
    p.converged = detail::parse_long(path, l.number, l.fields[4]) != 0;
    points.push_back(p);
  }
  return points;
}

// ---------------------------------------------------------------------------
// Training history CSV.

inline void save_history_csv(const std::string& path,
                             const std::vector<RoundStats>& history,
                             std::uint64_t seed) {
  std::string out = file_header(seed) + "round,adv_loss_bits,distortion,penalty\n";
  for (std::size_t r = 0; r < history.size(); ++r)
    out += std::to_string(r) + "," + format_number(history[r].adv_loss_bits) +
           "," + format_number(history[r].distortion) + "," +
           format_number(history[r].penalty) + "\n";
  write_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Mechanism JSON.

inline void save_mechanism_json(const std::string& path, const Mechanism& m,
                                std::uint64_t seed) {
  nlohmann::json q = nlohmann::json::array();
  for (std::size_t x = 0; x < m.x_alphabet().size(); ++x) {
    nlohmann::json per_y = nlohmann::json::array();
    for (std::size_t y = 0; y < m.y_alphabet().size(); ++y) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t k = 0; k < m.xhat_alphabet().size(); ++k)
        row.push_back(m.q(x, y, k));
      per_y.push_back(std::move(row));
    }
    q.push_back(std::move(per_y));
  }
  const nlohmann::json doc{{"meta", detail::meta_object(seed)},
                           {"x_alphabet", m.x_alphabet().symbols()},
                           {"y_alphabet", m.y_alphabet().symbols()},
                           {"xhat_alphabet", m.xhat_alphabet().symbols()},
                           {"q", std::move(q)}};
  write_atomic(path, doc.dump(2) + "\n");
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError(path, 0, "cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FileFormatError(path, 0, e.what());
  }
}

inline Mechanism load_mechanism_json(const std::string& path) {
  const auto doc = load_json_file(path);
  try {
    const Alphabet ax(doc.at("x_alphabet").get<std::vector<std::string>>());
    const Alphabet ay(doc.at("y_alphabet").get<std::vector<std::string>>());
    const Alphabet ak(doc.at("xhat_alphabet").get<std::vector<std::string>>());
    const auto& q = doc.at("q");
    if (q.size() != ax.size())
      throw Error("q has " + std::to_string(q.size()) + " x-slices");
    std::vector<double> flat;
    flat.reserve(ax.size() * ay.size() * ak.size());
    for (const auto& per_y : q) {
      if (per_y.size() != ay.size()) throw Error("q y-slice size mismatch");
      for (const auto& row : per_y) {
        if (row.size() != ak.size()) throw Error("q row size mismatch");
        for (const auto& v : row) flat.push_back(v.get<double>());
      }
    }
    return Mechanism(ax, ay, ak, std::move(flat));
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(path, 0, e.what());
  } catch (const Error& e) {
    throw FileFormatError(path, 0, e.what());
  }
}

// ---------------------------------------------------------------------------
// Networks and trained models (JSON).

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers())
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", activation_name(l.activation)},
                      {"weights", l.weights},
                      {"bias", l.bias}});
  return nlohmann::json{{"layers", std::move(layers)}};
}

inline Network network_from_json(const nlohmann::json& doc) {
  std::vector<Layer> layers;
  for (const auto& lj : doc.at("layers")) {
    Layer l;
    l.in = lj.at("in").get<std::size_t>();
    l.out = lj.at("out").get<std::size_t>();
    l.activation = activation_from_name(lj.at("activation").get<std::string>());
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.bias = lj.at("bias").get<std::vector<double>>();
    layers.push_back(std::move(l));
  }
  return Network(std::move(layers));
}

inline nlohmann::json training_config_to_json(const TrainingConfig& cfg) {
  return nlohmann::json{{"budget", cfg.budget},
                        {"adversary_steps_per_round", cfg.adversary_steps_per_round},
                        {"batch_size", cfg.batch_size},
                        {"rounds", cfg.rounds},
                        {"privatizer_lr", cfg.privatizer_lr},
                        {"adversary_lr", cfg.adversary_lr},
                        {"penalty_init", cfg.penalty_init},
                        {"penalty_growth", cfg.penalty_growth},
                        {"seed", cfg.seed},
                        {"adversary_hidden", cfg.adversary_hidden},
                        {"fresh_adversary_steps", cfg.fresh_adversary_steps},
                        {"fresh_batch_size", cfg.fresh_batch_size},
                        {"fresh_adversary_lr", cfg.fresh_adversary_lr},
                        {"holdout_fraction", cfg.holdout_fraction}};
}

inline TrainingConfig training_config_from_json(const nlohmann::json& doc,
                                                const std::string& where) {
  detail::require_keys(
      doc,
      {"budget", "adversary_steps_per_round", "batch_size", "rounds",
       "privatizer_lr", "adversary_lr", "penalty_init", "penalty_growth",
       "seed", "adversary_hidden", "fresh_adversary_steps", "fresh_batch_size",
       "fresh_adversary_lr", "holdout_fraction", "pattern", "hidden_widths",
       "noise_dim"},
      where);
  TrainingConfig cfg;
  try {
    if (doc.contains("budget")) cfg.budget = doc["budget"].get<double>();
    if (doc.contains("adversary_steps_per_round"))
      cfg.adversary_steps_per_round = doc["adversary_steps_per_round"].get<int>();
    if (doc.contains("batch_size"))
      cfg.batch_size = doc["batch_size"].get<std::size_t>();
    if (doc.contains("rounds")) cfg.rounds = doc["rounds"].get<long>();
    if (doc.contains("privatizer_lr"))
      cfg.privatizer_lr = doc["privatizer_lr"].get<double>();
    if (doc.contains("adversary_lr"))
      cfg.adversary_lr = doc["adversary_lr"].get<double>();
    if (doc.contains("penalty_init"))
      cfg.penalty_init = doc["penalty_init"].get<double>();
    if (doc.contains("penalty_growth"))
      cfg.penalty_growth = doc["penalty_growth"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("adversary_hidden"))
      cfg.adversary_hidden = doc["adversary_hidden"].get<std::vector<std::size_t>>();
    if (doc.contains("fresh_adversary_steps"))
      cfg.fresh_adversary_steps = doc["fresh_adversary_steps"].get<long>();
    if (doc.contains("fresh_batch_size"))
      cfg.fresh_batch_size = doc["fresh_batch_size"].get<std::size_t>();
    if (doc.contains("fresh_adversary_lr"))
      cfg.fresh_adversary_lr = doc["fresh_adversary_lr"].get<double>();
    if (doc.contains("holdout_fraction"))
      cfg.holdout_fraction = doc["holdout_fraction"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  if (cfg.budget < 0.0) throw Error(where + ": budget must be >= 0");
  if (cfg.rounds < 1) throw Error(where + ": rounds must be >= 1");
  if (cfg.batch_size < 1) throw Error(where + ": batch_size must be >= 1");
  if (cfg.adversary_steps_per_round < 1)
    throw Error(where + ": adversary_steps_per_round must be >= 1");
  if (cfg.holdout_fraction <= 0.0 || cfg.holdout_fraction >= 1.0)
    throw Error(where + ": holdout_fraction must be in (0,1)");
  return cfg;
}

inline nlohmann::json arch_to_json(const PrivatizerArch& arch) {
  return nlohmann::json{{"pattern", pattern_name(arch.pattern)},
                        {"hidden_widths", arch.hidden_widths},
                        {"noise_dim", arch.noise_dim}};
}

// Architecture keys may live in the same config object as the training keys.
inline PrivatizerArch arch_from_json(const nlohmann::json& doc,
                                     const std::string& where) {
  PrivatizerArch arch;
  try {
    if (doc.contains("pattern"))
      arch.pattern = pattern_from_name(doc["pattern"].get<std::string>());
    if (doc.contains("hidden_widths"))
      arch.hidden_widths = doc["hidden_widths"].get<std::vector<std::size_t>>();
    if (doc.contains("noise_dim"))
      arch.noise_dim = doc["noise_dim"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  if (arch.noise_dim < 1) throw Error(where + ": noise_dim must be >= 1");
  return arch;
}

inline void save_model_json(const std::string& path, const TrainedGAP& model) {
  const nlohmann::json doc{
      {"meta", detail::meta_object(model.config.seed)},
      {"privatizer",
       {{"arch", arch_to_json(model.privatizer.arch)},
        {"x_alphabet", model.privatizer.x_alphabet.symbols()},
        {"y_alphabet", model.privatizer.y_alphabet.symbols()},
        {"xhat_alphabet", model.privatizer.xhat_alphabet.symbols()},
        {"network", network_to_json(model.privatizer.net)}}},
      {"final_adversary", network_to_json(model.final_adversary)},
      {"config", training_config_to_json(model.config)}};
  write_atomic(path, doc.dump(2) + "\n");
}

inline TrainedGAP load_model_json(const std::string& path) {
  const auto doc = load_json_file(path);
  try {
    const auto& pj = doc.at("privatizer");
    Privatizer priv{
        network_from_json(pj.at("network")),
        arch_from_json(pj.at("arch"), path),
        Alphabet(pj.at("x_alphabet").get<std::vector<std::string>>()),
        Alphabet(pj.at("y_alphabet").get<std::vector<std::string>>()),
        Alphabet(pj.at("xhat_alphabet").get<std::vector<std::string>>())};
    TrainedGAP model{std::move(priv),
                     network_from_json(doc.at("final_adversary")),
                     training_config_from_json(doc.at("config"), path),
                     {}};
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(path, 0, e.what());
  } catch (const FileFormatError&) {
    throw;
  } catch (const Error& e) {
    throw FileFormatError(path, 0, e.what());
  }
}

// ---------------------------------------------------------------------------
// Adversary strategy JSON.

inline void save_strategy_json(const std::string& path,
                               const AdversaryStrategy& s,
                               const Alphabet& xhat_alphabet,
                               const Alphabet& y_alphabet, std::uint64_t seed) {
  nlohmann::json doc{{"meta", detail::meta_object(seed)},
                     {"xhat_alphabet", xhat_alphabet.symbols()},
                     {"y_alphabet", y_alphabet.symbols()}};
  if (s.kind == StrategyKind::kHard) {
    doc["kind"] = "hard";
    std::vector<std::string> labels;
    for (std::size_t y : s.hard_rule) labels.push_back(y_alphabet.symbol(y));
    doc["hard_rule"] = labels;
  } else {
    doc["kind"] = "soft";
    doc["soft_rule"] = s.soft_rule;
  }
  write_atomic(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Solver configuration (JSON object, possibly shared with CLI options).

inline SolverConfig solver_config_from_json(const nlohmann::json& doc,
                                            const std::string& where) {
  detail::require_keys(doc,
                       {"budget", "budgets", "loss", "max_iters", "step_size",
                        "penalty_init", "penalty_growth", "tolerance", "seed",
                        "grid"},
                       where);
  SolverConfig cfg;
  try {
    if (doc.contains("budget")) cfg.budget = doc["budget"].get<double>();
    if (doc.contains("max_iters")) cfg.max_iters = doc["max_iters"].get<long>();
    if (doc.contains("step_size")) cfg.step_size = doc["step_size"].get<double>();
    if (doc.contains("penalty_init"))
      cfg.penalty_init = doc["penalty_init"].get<double>();
    if (doc.contains("penalty_growth"))
      cfg.penalty_growth = doc["penalty_growth"].get<double>();
    if (doc.contains("tolerance"))
      cfg.tolerance = doc["tolerance"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + ": " + e.what());
  }
  if (cfg.budget < 0.0) throw Error(where + ": budget must be >= 0");
  if (cfg.max_iters < 1) throw Error(where + ": max_iters must be >= 1");
  if (cfg.tolerance <= 0.0) throw Error(where + ": tolerance must be > 0");
  return cfg;
}

}  // namespace gapforge

#endif  // GAPFORGE_IO_HPP_
