#include "emoprobe/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "emoprobe/errors.hpp"
#include "json.hpp"

namespace emoprobe {

using nlohmann::json;

const MetricValue& EvaluationReport::at(std::string_view emotion, std::size_t k,
                                        MetricKind kind) const {
  for (const auto& m : per_query) {
    if (m.query == emotion && m.k == k && m.kind == kind) return m;
  }
  throw Error("report has no " + std::string(to_string(kind)) + "@" + std::to_string(k) +
              " for '" + std::string(emotion) + "'");
}

const MacroValue& EvaluationReport::macro_at(std::size_t k, MetricKind kind) const {
  for (const auto& m : macro) {
    if (m.k == k && m.kind == kind) return m;
  }
  throw Error("report has no macro " + std::string(to_string(kind)) + "@" + std::to_string(k));
}

void compute_aggregates(EvaluationReport& report) {
  report.macro.clear();
  report.micro_precision.clear();
  for (auto k : report.ks) {
    for (auto kind : kAllMetricKinds) {
      MacroValue macro{kind, k, 0.0, 0, {}, false};
      double sum = 0.0;
      for (const auto& emotion : report.emotions) {
        const auto& m = report.at(emotion, k, kind);
        if (m.defined) {
          sum += m.value();
          ++macro.defined_count;
        } else {
          macro.skipped.push_back(emotion);
        }
      }
      macro.defined = macro.defined_count > 0;
      if (macro.defined) macro.value = sum / static_cast<double>(macro.defined_count);
      report.macro.push_back(std::move(macro));
    }
    MicroPrecision micro{k, 0, 0, false};
    for (const auto& emotion : report.emotions) {
      const auto& m = report.at(emotion, k, MetricKind::kPrecision);
      if (!m.defined) continue;
      micro.numerator += m.numerator;
      micro.denominator += m.denominator;
    }
    micro.defined = micro.denominator > 0;
    report.micro_precision.push_back(micro);
  }
}

void validate(const EvaluationReport& report) {
  if (report.model_tag.empty() || report.source_tag.empty() || report.checkpoint_ref.empty() ||
      report.timestamp.empty() || report.tool_version.empty()) {
    throw Error("report provenance fields must be non-empty");
  }
  std::set<std::tuple<std::string, std::size_t, MetricKind>> seen;
  for (const auto& m : report.per_query) {
    if (!seen.emplace(m.query, m.k, m.kind).second) {
      throw Error("duplicate report cell " + std::string(to_string(m.kind)) + "@" +
                  std::to_string(m.k) + " for '" + m.query + "'");
    }
  }
  if (seen.size() != report.emotions.size() * report.ks.size() * std::size(kAllMetricKinds)) {
    throw Error("report does not cover every (emotion, K, metric) cell");
  }
  for (const auto& e : report.emotions) {
    for (auto k : report.ks) {
      for (auto kind : kAllMetricKinds) report.at(e, k, kind);
    }
  }
}

ReportFormat parse_report_format(std::string_view tag) {
  if (tag == "tsv") return ReportFormat::kDelimited;
  if (tag == "json") return ReportFormat::kStructured;
  if (tag == "text") return ReportFormat::kPlainText;
  throw ConfigError("format", "unknown report format '" + std::string(tag) +
                                  "' (expected tsv, json or text)");
}

std::string_view file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::kDelimited:
      return ".tsv";
    case ReportFormat::kStructured:
      return ".json";
    case ReportFormat::kPlainText:
      return ".txt";
  }
  return "";
}

std::string format_percent(std::size_t numerator, std::size_t denominator) {
  if (denominator == 0) return std::string(kUndefinedCell);
  // Hundredths of a percent, rounded half-up in integer arithmetic.
  const unsigned long long scaled =
      (2ULL * 10000ULL * numerator + denominator) / (2ULL * denominator);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%llu.%02llu", scaled / 100, scaled % 100);
  return buf;
}

std::string format_percent(double fraction) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::string format_cell(const MetricValue& m) {
  if (!m.defined) return std::string(kUndefinedCell);
  return format_percent(m.numerator, m.denominator) + " (" + std::to_string(m.numerator) + ")";
}

namespace {

std::string fraction_text(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

// Display width in code points; good enough for the tables emitted here.
std::size_t display_width(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(std::string s, std::size_t width) {
  const auto w = display_width(s);
  if (w < width) s.append(width - w, ' ');
  return s;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    if (widths.size() < r.size()) widths.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) {
      widths[c] = std::max(widths[c], display_width(r[c]));
    }
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += c + 1 == r.size() ? r[c] : pad(r[c], widths[c] + 2);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::string metric_label(MetricKind kind) {
  switch (kind) {
    case MetricKind::kPrecision:
      return "P@K";
    case MetricKind::kDiversity:
      return "D@K";
    case MetricKind::kExplicitRate:
      return "explicit";
    case MetricKind::kImplicitRate:
      return "implicit";
  }
  return "?";
}

json to_json(const MetricValue& m) {
  return {{"emotion", m.query},       {"k", m.k},
          {"metric", std::string(to_string(m.kind))},
          {"numerator", m.numerator}, {"denominator", m.denominator},
          {"defined", m.defined},     {"value", m.value()}};
}

std::string render_structured(const EvaluationReport& r) {
  json doc;
  doc["schema_version"] = r.schema_version;
  doc["model_tag"] = r.model_tag;
  doc["source_tag"] = r.source_tag;
  doc["checkpoint_ref"] = r.checkpoint_ref;
  doc["pool_split"] = r.pool_split;
  doc["timestamp"] = r.timestamp;
  doc["tool_version"] = r.tool_version;
  doc["ks"] = r.ks;
  doc["emotions"] = r.emotions;
  doc["per_query"] = json::array();
  for (const auto& m : r.per_query) doc["per_query"].push_back(to_json(m));
  doc["macro"] = json::array();
  for (const auto& m : r.macro) {
    doc["macro"].push_back({{"k", m.k},
                            {"metric", std::string(to_string(m.kind))},
                            {"value", m.value},
                            {"defined", m.defined},
                            {"defined_count", m.defined_count},
                            {"skipped", m.skipped}});
  }
  doc["micro_precision"] = json::array();
  for (const auto& m : r.micro_precision) {
    doc["micro_precision"].push_back({{"k", m.k},
                                      {"numerator", m.numerator},
                                      {"denominator", m.denominator},
                                      {"defined", m.defined},
                                      {"value", m.value()}});
  }
  return doc.dump(2) + "\n";
}

std::string render_delimited(const EvaluationReport& r) {
  std::ostringstream os;
  os << "model_tag\tsource_tag\temotion\tk\tmetric\tvalue\tnumerator\tdenominator\tdefined\n";
  auto row = [&](const std::string& emotion, std::size_t k, MetricKind kind, bool defined,
                 double value, std::size_t num, std::size_t den) {
    os << r.model_tag << '\t' << r.source_tag << '\t' << emotion << '\t' << k << '\t'
       << to_string(kind) << '\t' << (defined ? fraction_text(value) : "NA") << '\t' << num
       << '\t' << den << '\t' << (defined ? "true" : "false") << '\n';
  };
  for (const auto& m : r.per_query) {
    row(m.query, m.k, m.kind, m.defined, m.value(), m.numerator, m.denominator);
  }
  // Aggregates: numerator/denominator are defined queries / all queries.
  for (const auto& m : r.macro) {
    row("(macro)", m.k, m.kind, m.defined, m.value, m.defined_count, r.emotions.size());
  }
  for (const auto& m : r.micro_precision) {
    row("(micro)", m.k, MetricKind::kPrecision, m.defined, m.value(), m.numerator,
        m.denominator);
  }
  return os.str();
}

std::string render_plain(const EvaluationReport& r) {
  std::ostringstream os;
  os << "model: " << r.model_tag << "\ncorpus: " << r.source_tag << "\npool: " << r.pool_split
     << "\ncheckpoint: " << r.checkpoint_ref << "\ntool: " << r.tool_version
     << "\ntimestamp: " << r.timestamp << "\n\n";

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"metric", "K"};
  for (const auto& e : r.emotions) header.push_back(e + "(%)");
  header.push_back("macro(%)");
  rows.push_back(header);
  bool any_undefined = false;
  for (auto kind : kAllMetricKinds) {
    for (auto k : r.ks) {
      std::vector<std::string> row{metric_label(kind), std::to_string(k)};
      for (const auto& e : r.emotions) {
        const auto& m = r.at(e, k, kind);
        any_undefined = any_undefined || !m.defined;
        row.push_back(format_cell(m));
      }
      const auto& macro = r.macro_at(k, kind);
      row.push_back(macro.defined ? format_percent(macro.value) : std::string(kUndefinedCell));
      rows.push_back(std::move(row));
    }
  }
  os << render_table(rows);
  os << "\nmicro-averaged P@K:";
  for (const auto& m : r.micro_precision) {
    os << "  K=" << m.k << ' '
       << (m.defined ? format_percent(m.numerator, m.denominator) + " (" +
                           std::to_string(m.numerator) + "/" + std::to_string(m.denominator) + ")"
                     : std::string(kUndefinedCell));
  }
  os << "\n\nCells show the percentage with the numerator count in parentheses; for D@K\n"
        "the count is the number of unique events retrieved after de-duplication.\n";
  if (any_undefined) {
    os << "* undefined: no correctly retrieved events in the top K, or no relevant\n"
          "  event in the pool.\n";
  }
  return os.str();
}

}  // namespace

std::string render(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kStructured:
      return render_structured(report);
    case ReportFormat::kDelimited:
      return render_delimited(report);
    case ReportFormat::kPlainText:
      return render_plain(report);
  }
  throw ConfigError("format", "unknown report format");
}

EvaluationReport parse_structured_report(std::string_view document) {
  EvaluationReport r;
  try {
    const json doc = json::parse(document);
    r.schema_version = doc.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      throw FormatError("unsupported report schema version " +
                        std::to_string(r.schema_version));
    }
    r.model_tag = doc.at("model_tag").get<std::string>();
    r.source_tag = doc.at("source_tag").get<std::string>();
    r.checkpoint_ref = doc.at("checkpoint_ref").get<std::string>();
    r.pool_split = doc.at("pool_split").get<std::string>();
    r.timestamp = doc.at("timestamp").get<std::string>();
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.ks = doc.at("ks").get<std::vector<std::size_t>>();
    r.emotions = doc.at("emotions").get<std::vector<std::string>>();
    for (const auto& m : doc.at("per_query")) {
      r.per_query.push_back({parse_metric_kind(m.at("metric").get<std::string>()),
                             m.at("k").get<std::size_t>(), m.at("emotion").get<std::string>(),
                             m.at("numerator").get<std::size_t>(),
                             m.at("denominator").get<std::size_t>(),
                             m.at("defined").get<bool>()});
    }
    for (const auto& m : doc.at("macro")) {
      r.macro.push_back({parse_metric_kind(m.at("metric").get<std::string>()),
                         m.at("k").get<std::size_t>(), m.at("value").get<double>(),
                         m.at("defined_count").get<std::size_t>(),
                         m.at("skipped").get<std::vector<std::string>>(),
                         m.at("defined").get<bool>()});
    }
    for (const auto& m : doc.at("micro_precision")) {
      r.micro_precision.push_back({m.at("k").get<std::size_t>(),
                                   m.at("numerator").get<std::size_t>(),
                                   m.at("denominator").get<std::size_t>(),
                                   m.at("defined").get<bool>()});
    }
  } catch (const json::exception& err) {
    throw FormatError(std::string("report document: ") + err.what());
  } catch (const ConfigError& err) {
    throw FormatError(std::string("report document: ") + err.what());
  }
  return r;
}

ComparisonTable merge(std::span<const EvaluationReport> reports) {
  if (reports.empty()) throw Error("merge needs at least one report");
  ComparisonTable table;
  const auto& first = reports.front();
  table.source_tag = first.source_tag;
  table.ks = first.ks;
  table.emotions = first.emotions;

  std::set<std::string> models;
  for (const auto& r : reports) {
    if (r.source_tag != first.source_tag) {
      throw Error("cannot merge report for model '" + r.model_tag + "': corpus '" +
                  r.source_tag + "' differs from '" + first.source_tag + "'");
    }
    if (r.ks != first.ks) {
      throw Error("cannot merge report for model '" + r.model_tag + "': cutoffs differ");
    }
    if (r.emotions != first.emotions) {
      throw Error("cannot merge report for model '" + r.model_tag + "': emotion sets differ");
    }
    if (!models.insert(r.model_tag).second) {
      throw Error("cannot merge: model '" + r.model_tag + "' appears twice");
    }
  }

  std::vector<const EvaluationReport*> ordered;
  for (const auto& r : reports) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->model_tag < b->model_tag; });
  for (const auto* r : ordered) {
    for (const auto& e : table.emotions) {
      for (auto k : table.ks) {
        table.rows.push_back({r->model_tag, e, k, r->at(e, k, MetricKind::kPrecision),
                              r->at(e, k, MetricKind::kDiversity),
                              r->at(e, k, MetricKind::kExplicitRate),
                              r->at(e, k, MetricKind::kImplicitRate)});
      }
    }
  }
  return table;
}

std::string render(const ComparisonTable& table, ReportFormat format) {
  if (format == ReportFormat::kDelimited) {
    std::ostringstream os;
    os << "model_tag\temotion\tk";
    for (auto kind : kAllMetricKinds) {
      os << '\t' << to_string(kind) << '\t' << to_string(kind) << "_numerator\t"
         << to_string(kind) << "_denominator";
    }
    os << '\n';
    for (const auto& row : table.rows) {
      os << row.model_tag << '\t' << row.emotion << '\t' << row.k;
      for (const auto* m : {&row.precision, &row.diversity, &row.explicit_rate,
                            &row.implicit_rate}) {
        os << '\t' << (m->defined ? fraction_text(m->value()) : "NA") << '\t' << m->numerator
           << '\t' << m->denominator;
      }
      os << '\n';
    }
    return os.str();
  }
  if (format == ReportFormat::kPlainText) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"model", "emotion", "K", "P@K(%)", "D@K(%)", "explicit(%)", "implicit(%)"});
    for (const auto& row : table.rows) {
      rows.push_back({row.model_tag, row.emotion, std::to_string(row.k),
                      format_cell(row.precision), format_cell(row.diversity),
                      format_cell(row.explicit_rate), format_cell(row.implicit_rate)});
    }
    return "corpus: " + table.source_tag + "\n\n" + render_table(rows);
  }
  throw ConfigError("format", "comparison tables render as tsv or text only");
}

}  // namespace emoprobe
