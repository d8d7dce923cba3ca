// Copyright 2026 The nerunify Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nerunify/eval.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <set>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "nerunify/text.h"

namespace nerunify {

using nlohmann::json;
using nlohmann::ordered_json;

double MatchCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double MatchCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double MatchCounts::f1() const {
  return F1FromPrecisionRecall(precision(), recall());
}

double F1FromPrecisionRecall(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

using Triple = std::tuple<std::string, std::size_t, std::size_t>;

std::vector<Triple> Triples(std::span<const EntityMention> mentions) {
  std::vector<Triple> out;
  out.reserve(mentions.size());
  for (const EntityMention &m : mentions) out.emplace_back(m.label.str(), m.start, m.end);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

ScoreResult MicroF1(std::span<const EntityMention> gold,
                    std::span<const EntityMention> predicted) {
  ScoreResult result;
  std::vector<Triple> g = Triples(gold);
  std::vector<Triple> p = Triples(predicted);
  auto last = std::unique(p.begin(), p.end());
  result.duplicates_removed = static_cast<std::size_t>(p.end() - last);
  p.erase(last, p.end());

  // Merge the two sorted lists; each prediction pairs with at most one gold.
  std::size_t i = 0, j = 0;
  while (i < g.size() && j < p.size()) {
    if (g[i] < p[j]) {
      ++i;
    } else if (p[j] < g[i]) {
      ++j;
    } else {
      ++result.counts.tp;
      ++i;
      ++j;
    }
  }
  result.counts.fp = p.size() - result.counts.tp;
  result.counts.fn = g.size() - result.counts.tp;
  return result;
}

namespace {

// Index one past the '}' matching the '{' at `open`, or npos.
std::size_t MatchBrace(std::string_view s, std::size_t open) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    char c = s[i];
    if (quote != 0) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      // An apostrophe inside a bare word is not a quote.
      if (c == '\'' && i > 0 && std::isalnum(static_cast<unsigned char>(s[i - 1]))) {
        continue;
      }
      quote = c;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

// Rewrites single-quoted strings as JSON double-quoted strings.
std::string RepairSingleQuotes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quote == 0) {
      bool opens_single =
          c == '\'' && !(i > 0 && std::isalnum(static_cast<unsigned char>(s[i - 1])));
      if (c == '"' || opens_single) {
        quote = c;
        out.push_back('"');
      } else {
        out.push_back(c);
      }
      continue;
    }
    if (c == '\\' && i + 1 < s.size()) {
      if (quote == '\'' && s[i + 1] == '\'') {
        out.push_back('\'');
      } else {
        out.push_back(c);
        out.push_back(s[i + 1]);
      }
      ++i;
      continue;
    }
    if (c == quote) {
      // A single quote followed by a letter is an apostrophe, not a close.
      if (quote == '\'' && i + 1 < s.size() &&
          std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
        out.push_back('\'');
        continue;
      }
      quote = 0;
      out.push_back('"');
    } else if (c == '"' && quote == '\'') {
      out += "\\\"";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

ParsedResponse ParseResponse(std::string_view response,
                             std::span<const std::string> prompted_labels) {
  ParsedResponse out;
  std::string text(response);

  std::size_t fence = text.find("```");
  if (fence != std::string::npos) {
    std::size_t body = text.find('\n', fence);
    body = body == std::string::npos ? fence + 3 : body + 1;
    std::size_t close = text.find("```", body);
    text = text.substr(body, close == std::string::npos ? std::string::npos
                                                        : close - body);
    out.fixes.push_back("strip code fences");
  }

  std::size_t open = text.find('{');
  if (open == std::string::npos) {
    out.parse_failed = true;
    return out;
  }
  std::size_t close = MatchBrace(text, open);
  if (close == std::string::npos) {
    out.parse_failed = true;
    return out;
  }
  if (!Trim(std::string_view(text).substr(0, open)).empty() ||
      !Trim(std::string_view(text).substr(close)).empty()) {
    out.fixes.push_back("trim surrounding prose");
  }
  std::string object = text.substr(open, close - open);

  ordered_json doc = ordered_json::parse(object, nullptr, false);
  if (doc.is_discarded()) {
    doc = ordered_json::parse(RepairSingleQuotes(object), nullptr, false);
    if (doc.is_discarded()) {
      out.parse_failed = true;
      return out;
    }
    out.fixes.push_back("repair single quotes");
  }
  if (!doc.is_object()) {
    out.parse_failed = true;
    return out;
  }

  std::set<std::string_view> allowed(prompted_labels.begin(), prompted_labels.end());
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (allowed.count(it.key()) == 0) {
      out.fixes.push_back("drop label '" + it.key() + "'");
      continue;
    }
    std::vector<std::string> surfaces;
    const ordered_json &v = it.value();
    if (v.is_string()) {
      surfaces.push_back(v.get<std::string>());
      out.fixes.push_back("wrap scalar value of '" + it.key() + "'");
    } else if (v.is_array()) {
      for (const ordered_json &e : v) {
        if (e.is_string()) {
          surfaces.push_back(e.get<std::string>());
        } else {
          out.fixes.push_back("skip non-string entry under '" + it.key() + "'");
        }
      }
    } else if (!v.is_null()) {
      out.fixes.push_back("skip malformed value of '" + it.key() + "'");
      continue;
    }
    out.labels.emplace_back(it.key(), std::move(surfaces));
  }
  return out;
}

ResolvedSpans ResolveSpans(std::string_view text, const LabelSurfaces &surfaces) {
  ResolvedSpans out;
  std::u32string t = DecodeUtf8(text);
  for (const auto &[label, list] : surfaces) {
    std::vector<std::pair<std::size_t, std::size_t>> claimed;
    for (const std::string &surface : list) {
      std::u32string s = DecodeUtf8(surface);
      std::optional<std::pair<std::size_t, std::size_t>> disjoint, fallback;
      if (!s.empty()) {
        for (std::size_t pos = t.find(s); pos != std::u32string::npos;
             pos = t.find(s, pos + 1)) {
          std::pair<std::size_t, std::size_t> span{pos, pos + s.size()};
          bool overlaps = false, identical = false;
          for (const auto &c : claimed) {
            overlaps |= span.first < c.second && c.first < span.second;
            identical |= span == c;
          }
          if (!overlaps) {
            disjoint = span;
            break;
          }
          if (!identical && !fallback) fallback = span;
        }
      }
      auto chosen = disjoint ? disjoint : fallback;
      if (!chosen) {
        out.unresolved.emplace_back(label, surface);
        continue;
      }
      claimed.push_back(*chosen);
      out.mentions.push_back(
          {UniversalLabel::Parse(label), chosen->first, chosen->second, surface});
    }
  }
  std::sort(out.mentions.begin(), out.mentions.end(), MentionLess);
  return out;
}

std::vector<Prediction> ReadPredictions(std::istream &in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("sample_id") ||
        !j["sample_id"].is_string()) {
      throw ParseError(line_no, "prediction needs a string sample_id");
    }
    Prediction p;
    p.sample_id = j["sample_id"].get<std::string>();
    if (j.contains("response_text")) {
      if (!j["response_text"].is_string()) {
        throw ParseError(line_no, "response_text must be a string");
      }
      p.response_text = j["response_text"].get<std::string>();
    } else if (j.contains("mentions") && j["mentions"].is_array()) {
      for (const json &m : j["mentions"]) {
        if (!m.is_object() || !m.contains("start") || !m.contains("end") ||
            !m.contains("label")) {
          throw ParseError(line_no, "mention needs start, end and label");
        }
        p.mentions.push_back({UniversalLabel::Parse(m["label"].get<std::string>()),
                              m["start"].get<std::size_t>(),
                              m["end"].get<std::size_t>(), ""});
      }
    } else {
      throw ParseError(line_no, "prediction needs response_text or mentions");
    }
    out.push_back(std::move(p));
  }
  return out;
}

RunReport EvaluateRun(const Corpus &gold, const std::vector<Prediction> &predictions,
                      std::uint64_t seed, Diagnostics *diag) {
  RunReport report;
  report.seed = seed;
  std::unordered_map<std::string_view, const Prediction *> by_id;
  for (const Prediction &p : predictions) {
    if (!by_id.emplace(p.sample_id, &p).second) {
      Warn(diag, "duplicate prediction for sample '" + p.sample_id +
                     "', keeping the first");
    }
  }
  std::size_t matched = 0;
  for (const Dataset &d : gold.datasets) {
    bool any = std::any_of(d.samples.begin(), d.samples.end(),
                           [&](const Sample &s) { return by_id.count(s.id) > 0; });
    if (!any) {
      Warn(diag, "no predictions for dataset '" + d.info.id + "', skipped");
      continue;
    }
    std::vector<std::string> prompted(d.info.label_set.begin(), d.info.label_set.end());
    MatchCounts &dataset_counts = report.per_dataset[d.info.id];
    auto &label_counts = report.per_label[d.info.id];
    for (const std::string &l : prompted) label_counts[l];
    for (const Sample &s : d.samples) {
      std::vector<EntityMention> predicted;
      std::vector<std::pair<std::string, std::string>> unresolved;
      auto it = by_id.find(s.id);
      if (it != by_id.end()) {
        ++matched;
        const Prediction &p = *it->second;
        if (p.response_text) {
          ParsedResponse parsed = ParseResponse(*p.response_text, prompted);
          if (parsed.parse_failed) ++report.parse_failures;
          ResolvedSpans resolved = ResolveSpans(s.text, parsed.labels);
          predicted = std::move(resolved.mentions);
          unresolved = std::move(resolved.unresolved);
        } else {
          predicted = p.mentions;
        }
      }
      ScoreResult score = MicroF1(s.mentions, predicted);
      report.duplicates_removed += score.duplicates_removed;
      report.unresolved += unresolved.size();
      MatchCounts counts = score.counts;
      counts.fp += unresolved.size();
      dataset_counts += counts;
      report.aggregate += counts;

      // Per-label breakdown.
      std::set<std::string> labels;
      for (const EntityMention &m : s.mentions) labels.insert(m.label.str());
      for (const EntityMention &m : predicted) labels.insert(m.label.str());
      for (const auto &u : unresolved) labels.insert(u.first);
      for (const std::string &l : labels) {
        std::vector<EntityMention> g, pr;
        for (const EntityMention &m : s.mentions) {
          if (m.label.str() == l) g.push_back(m);
        }
        for (const EntityMention &m : predicted) {
          if (m.label.str() == l) pr.push_back(m);
        }
        MatchCounts lc = MicroF1(g, pr).counts;
        for (const auto &u : unresolved) lc.fp += u.first == l ? 1 : 0;
        label_counts[l] += lc;
      }
    }
  }
  if (matched < predictions.size()) {
    Warn(diag, std::to_string(predictions.size() - matched) +
                   " predictions refer to unknown samples");
  }
  return report;
}

namespace {

ordered_json CountsJson(const MatchCounts &c) {
  return ordered_json{{"tp", c.tp},
                      {"fp", c.fp},
                      {"fn", c.fn},
                      {"precision", c.precision()},
                      {"recall", c.recall()},
                      {"f1", c.f1()}};
}

}  // namespace

ordered_json RunReportToJson(const RunReport &report) {
  ordered_json out;
  out["seed"] = report.seed;
  out["aggregate"] = CountsJson(report.aggregate);
  ordered_json datasets = ordered_json::object();
  for (const auto &[id, c] : report.per_dataset) datasets[id] = CountsJson(c);
  out["per_dataset"] = std::move(datasets);
  ordered_json labels = ordered_json::object();
  for (const auto &[id, per] : report.per_label) {
    ordered_json l = ordered_json::object();
    for (const auto &[label, c] : per) l[label] = CountsJson(c);
    labels[id] = std::move(l);
  }
  out["per_label"] = std::move(labels);
  out["parse_failures"] = report.parse_failures;
  out["unresolved"] = report.unresolved;
  out["duplicates_removed"] = report.duplicates_removed;
  return out;
}

namespace {

double Mean(const std::vector<double> &v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double SampleSd(const std::vector<double> &v) {
  if (v.size() < 2) return 0.0;
  double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

AggregateReport AggregateRuns(std::span<const RunReport> reports) {
  AggregateReport out;
  out.runs = reports.size();
  out.sd_defined = reports.size() > 1;
  if (reports.empty()) return out;
  for (const RunReport &r : reports) {
    bool same = r.per_dataset.size() == reports[0].per_dataset.size() &&
                std::equal(r.per_dataset.begin(), r.per_dataset.end(),
                           reports[0].per_dataset.begin(),
                           [](const auto &a, const auto &b) { return a.first == b.first; });
    if (!same) throw DataError("runs cover different dataset inventories");
  }
  for (const auto &[id, unused] : reports[0].per_dataset) {
    DatasetAggregate agg;
    agg.dataset_id = id;
    for (const RunReport &r : reports) agg.runs.push_back(r.per_dataset.at(id).f1());
    agg.mean = Mean(agg.runs);
    agg.sd = SampleSd(agg.runs);
    out.datasets.push_back(std::move(agg));
  }
  for (std::size_t r = 0; r < reports.size(); ++r) {
    std::vector<double> f1s;
    for (const DatasetAggregate &d : out.datasets) f1s.push_back(d.runs[r]);
    out.run_averages.push_back(Mean(f1s));
  }
  out.average = Mean(out.run_averages);
  return out;
}

ordered_json AggregateToJson(const AggregateReport &report) {
  ordered_json out;
  out["runs"] = report.runs;
  out["sd_defined"] = report.sd_defined;
  out["average"] = report.average;
  out["run_averages"] = report.run_averages;
  ordered_json ds = ordered_json::array();
  for (const DatasetAggregate &d : report.datasets) {
    ds.push_back({{"dataset_id", d.dataset_id},
                  {"mean", d.mean},
                  {"sd", d.sd},
                  {"runs", d.runs}});
  }
  out["datasets"] = std::move(ds);
  return out;
}

std::string AggregateToCsv(const AggregateReport &report) {
  std::string out = "run";
  for (const DatasetAggregate &d : report.datasets) out += "," + d.dataset_id;
  out += ",average\n";
  for (std::size_t r = 0; r < report.runs; ++r) {
    out += std::to_string(r + 1);
    for (const DatasetAggregate &d : report.datasets) {
      out += fmt::format(",{:.2f}", 100.0 * d.runs[r]);
    }
    out += fmt::format(",{:.2f}\n", 100.0 * report.run_averages[r]);
  }
  out += "mean";
  for (const DatasetAggregate &d : report.datasets) {
    out += fmt::format(",{:.2f}", 100.0 * d.mean);
  }
  out += fmt::format(",{:.2f}\n", 100.0 * report.average);
  return out;
}

}  // namespace nerunify
