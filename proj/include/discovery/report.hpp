#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "discovery/simulation.hpp"

namespace discovery {

enum class ReportFormat { json, csv, jsonl };

inline ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "jsonl") return ReportFormat::jsonl;
  throw invalid_config("unknown report format \"" + name + "\" (expected json, csv or jsonl)");
}

// Format from the file extension, defaulting to json.
inline ReportFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return ReportFormat::csv;
  if (ext == ".jsonl") return ReportFormat::jsonl;
  return ReportFormat::json;
}

// Reports carry numbers at 6 decimal places: JSON numbers are rounded to 6
// places, CSV cells are printed with %.6f.
inline double round6(double x) { return std::round(x * 1e6) / 1e6; }

inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", round6(x) == 0.0 ? 0.0 : x);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

using ojson = nlohmann::ordered_json;

inline ojson subset_list_json(const std::vector<SubsetProbability>& subsets) {
  ojson out = ojson::array();
  for (const auto& s : subsets) out.push_back({{"subset", s.subset}, {"probability", round6(s.probability)}});
  return out;
}

// A report is a list of flat rows plus a metadata header for the JSON form.
struct Table {
  std::vector<std::string> columns;
  std::vector<ojson> rows;  // keys in column order
  ojson meta = ojson::object();
  std::string rows_key = "rows";
};

inline Table to_table(const DialogueResult& r) {
  Table t;
  t.columns = {"exchange", "bot", "human", "score"};
  t.rows_key = "exchanges";
  for (std::size_t i = 0; i < r.exchanges.size(); ++i)
    t.rows.push_back({{"exchange", i + 1},
                      {"bot", r.exchanges[i].bot},
                      {"human", r.exchanges[i].human},
                      {"score", round6(r.exchanges[i].score)}});
  t.meta = {{"policy", r.policy_name},
            {"seed", r.seed},
            {"true_persona", r.true_persona.ids()},
            {"final_score", round6(r.final_score)},
            {"detected", r.detected},
            {"final_posterior_top", subset_list_json(r.final_posterior_top)}};
  return t;
}

inline Table to_table(const ComparisonReport& r) {
  Table t;
  t.columns = {"policy", "mean_score", "detection_rate", "pct_questions", "mean_len", "n"};
  for (const auto& row : r.rows)
    t.rows.push_back({{"policy", row.policy},
                      {"mean_score", round6(row.mean_score)},
                      {"detection_rate", round6(row.detection_rate)},
                      {"pct_questions", round6(row.pct_questions)},
                      {"mean_len", round6(row.mean_len)},
                      {"n", row.n}});
  ojson paired = ojson::array();
  for (const auto& p : r.paired)
    paired.push_back({{"first", p.first},
                      {"second", p.second},
                      {"mean_difference", round6(p.mean)},
                      {"std_error", round6(p.std_error)}});
  t.meta = {{"paired", paired}};
  return t;
}

inline Table to_table(const std::vector<ProbeResult>& results) {
  Table t;
  t.columns = {"pool", "accuracy", "n_probes", "n_facts"};
  for (const auto& r : results)
    t.rows.push_back(
        {{"pool", r.pool_name}, {"accuracy", round6(r.accuracy)}, {"n_probes", r.n_probes}, {"n_facts", r.n_facts}});
  return t;
}

inline std::string render(const Table& t, ReportFormat format) {
  std::string out;
  switch (format) {
    case ReportFormat::json: {
      ojson doc = t.meta;
      doc[t.rows_key] = t.rows;
      out = doc.dump(2) + "\n";
      break;
    }
    case ReportFormat::jsonl:
      for (const auto& row : t.rows) out += row.dump() + "\n";
      break;
    case ReportFormat::csv: {
      for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
      out += "\n";
      for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
          const auto& v = row.at(t.columns[c]);
          if (c) out += ",";
          if (v.is_string()) out += csv_escape(v.get<std::string>());
          else if (v.is_number_float()) out += fixed6(v.get<double>());
          else out += v.dump();
        }
        out += "\n";
      }
      break;
    }
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

template <typename Result>
void export_report(const Result& result, const std::filesystem::path& path, ReportFormat format) {
  write_file(path, render(to_table(result), format));
}

}  // namespace discovery
