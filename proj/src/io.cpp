#include "taxagg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "taxagg/errors.hpp"

namespace taxagg {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool skip_line(const std::string& line) {
  return line.empty() || line[0] == '#';
}

double parse_number(const std::string& text, const std::string& path, long line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path, line_no, "not a number: '" + text + "'");
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::generic, "cannot write " + path);
  return out;
}

// Reads lines, strips trailing \r, yields (line_no, content) for data lines.
template <typename Fn>
void for_data_lines(std::istream& in, Fn&& fn) {
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_line(line)) continue;
    fn(line_no, line);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_meta_header(const MetaHeader& meta) {
  std::ostringstream os;
  os << "# taxagg " << kToolVersion << "\n";
  if (!meta.command.empty()) os << "# command: " << meta.command << "\n";
  if (meta.has_seed) os << "# seed: " << meta.seed << "\n";
  if (!meta.config_digest.empty()) os << "# config-digest: " << meta.config_digest << "\n";
  for (const auto& [key, value] : meta.extra) {
    os << "# " << key << ": " << value << "\n";
  }
  return os.str();
}

std::string config_digest(const std::map<std::string, std::string>& keyvals) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : keyvals) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- taxonomy ---------------------------------------------------------------

std::vector<Edge> load_taxonomy_edges(const std::string& path) {
  auto in = open_input(path);
  std::vector<Edge> edges;
  for_data_lines(in, [&](long line_no, const std::string& line) {
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(path, line_no, "expected 'child<TAB>parent'");
    }
    edges.push_back(Edge{fields[0], fields[1]});
  });
  if (edges.empty()) throw EmptyInputError("no edges in " + path);
  return edges;
}

Taxonomy load_taxonomy(const std::string& path) {
  return Taxonomy::from_edges(load_taxonomy_edges(path));
}

void save_taxonomy(std::ostream& os, const Taxonomy& t, const MetaHeader& meta) {
  os << format_meta_header(meta);
  for (const Edge& e : t.edge_list()) {
    os << e.child << '\t' << e.parent << '\n';
  }
}

void save_taxonomy(const std::string& path, const Taxonomy& t, const MetaHeader& meta) {
  auto out = open_output(path);
  save_taxonomy(out, t, meta);
}

// --- score sheets -----------------------------------------------------------

std::vector<ScoreSheet> load_sheets(const std::string& path, const Taxonomy* validate) {
  auto in = open_input(path);
  std::map<std::string, ScoreSheet> by_instance;
  for_data_lines(in, [&](long line_no, const std::string& line) {
    auto fields = split_tabs(line);
    if (fields.size() != 4) {
      throw ParseError(path, line_no, "expected 'instance<TAB>classifier<TAB>class<TAB>score'");
    }
    double score = parse_number(fields[3], path, line_no);
    if (!(score >= 0.0 && score <= 1.0)) {
      throw InvalidScoreError("score " + fields[3] + " outside [0,1] for instance " + fields[0] +
                              ", class " + fields[2] + " (" + path + ":" +
                              std::to_string(line_no) + ")");
    }
    ScoreSheet& sheet = by_instance[fields[0]];
    sheet.instance_id = fields[0];
    auto [it, inserted] = sheet.scores[fields[1]].emplace(fields[2], score);
    (void)it;
    if (!inserted) {
      throw ParseError(path, line_no, "duplicate record for instance " + fields[0] +
                                          ", classifier " + fields[1] + ", class " + fields[2]);
    }
  });
  if (by_instance.empty()) throw EmptyInputError("no score records in " + path);

  std::vector<ScoreSheet> sheets;
  sheets.reserve(by_instance.size());
  for (auto& [id, sheet] : by_instance) {
    (void)id;
    if (validate) validate_sheet(*validate, sheet);
    sheets.push_back(std::move(sheet));
  }
  return sheets;
}

void save_sheets(std::ostream& os, const std::vector<ScoreSheet>& sheets, const MetaHeader& meta) {
  os << format_meta_header(meta);
  for (const auto& sheet : sheets) {
    for (const auto& [classifier, class_scores] : sheet.scores) {
      for (const auto& [class_id, score] : class_scores) {
        os << sheet.instance_id << '\t' << classifier << '\t' << class_id << '\t'
           << format_double(score) << '\n';
      }
    }
  }
}

void save_sheets(const std::string& path, const std::vector<ScoreSheet>& sheets,
                 const MetaHeader& meta) {
  auto out = open_output(path);
  save_sheets(out, sheets, meta);
}

// --- gold labels ------------------------------------------------------------

std::map<std::string, std::vector<ClassId>> load_gold(const std::string& path,
                                                      const Taxonomy* validate) {
  auto in = open_input(path);
  std::map<std::string, std::vector<ClassId>> out;
  for_data_lines(in, [&](long line_no, const std::string& line) {
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(path, line_no, "expected 'instance<TAB>class'");
    }
    if (validate && !validate->contains(fields[1])) {
      throw UnknownClassError(fields[1] + " (" + path + ":" + std::to_string(line_no) + ")");
    }
    out[fields[0]].push_back(fields[1]);
  });
  if (out.empty()) throw EmptyInputError("no labels in " + path);
  return out;
}

void save_gold(const std::string& path, const std::map<std::string, ClassId>& golds,
               const MetaHeader& meta) {
  auto out = open_output(path);
  out << format_meta_header(meta);
  for (const auto& [instance, gold] : golds) {
    out << instance << '\t' << gold << '\n';
  }
}

// --- observation parameters --------------------------------------------------

std::vector<ObservationParams> load_params(const std::string& path, const Taxonomy* validate) {
  auto in = open_input(path);
  std::vector<ObservationParams> out;
  for_data_lines(in, [&](long line_no, const std::string& line) {
    auto fields = split_tabs(line);
    if (fields.size() < 3) {
      throw ParseError(path, line_no, "expected 'classifier<TAB>class<TAB>kind<TAB>params...'");
    }
    ObservationParams p;
    p.classifier_id = fields[0];
    p.class_id = fields[1];
    if (validate && !validate->contains(p.class_id)) {
      throw UnknownClassError(p.class_id + " (" + path + ":" + std::to_string(line_no) + ")");
    }
    if (fields[2] == "binormal") {
      if (fields.size() != 7 && fields.size() != 8) {
        throw ParseError(path, line_no, "binormal records carry 4 parameters");
      }
      BinormalModel m;
      m.mu_off = parse_number(fields[3], path, line_no);
      m.sigma_off = parse_number(fields[4], path, line_no);
      m.mu_on = parse_number(fields[5], path, line_no);
      m.sigma_on = parse_number(fields[6], path, line_no);
      if (!(m.sigma_off > 0.0) || !(m.sigma_on > 0.0)) {
        throw ParseError(path, line_no, "sigma must be positive");
      }
      p.model = m;
      if (fields.size() == 8) p.fallback = fields[7] == "fallback";
    } else if (fields[2] == "discrete") {
      if (fields.size() != 5 && fields.size() != 6) {
        throw ParseError(path, line_no, "discrete records carry 2 parameters");
      }
      DiscreteModel m;
      m.sensitivity = parse_number(fields[3], path, line_no);
      m.specificity = parse_number(fields[4], path, line_no);
      p.model = m;
      if (fields.size() == 6) p.fallback = fields[5] == "fallback";
    } else {
      throw ParseError(path, line_no, "unknown model kind '" + fields[2] + "'");
    }
    out.push_back(std::move(p));
  });
  if (out.empty()) throw EmptyInputError("no parameter records in " + path);
  return out;
}

void save_params(std::ostream& os, const std::vector<ObservationParams>& params,
                 const MetaHeader& meta) {
  os << format_meta_header(meta);
  std::vector<ObservationParams> sorted = params;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.classifier_id != b.classifier_id ? a.classifier_id < b.classifier_id
                                              : a.class_id < b.class_id;
  });
  for (const auto& p : sorted) {
    os << p.classifier_id << '\t' << p.class_id << '\t';
    if (const auto* bn = std::get_if<BinormalModel>(&p.model)) {
      os << "binormal\t" << format_double(bn->mu_off) << '\t' << format_double(bn->sigma_off)
         << '\t' << format_double(bn->mu_on) << '\t' << format_double(bn->sigma_on);
    } else {
      const auto& d = std::get<DiscreteModel>(p.model);
      os << "discrete\t" << format_double(d.sensitivity) << '\t' << format_double(d.specificity);
    }
    if (p.fallback) os << "\tfallback";
    os << '\n';
  }
}

void save_params(const std::string& path, const std::vector<ObservationParams>& params,
                 const MetaHeader& meta) {
  auto out = open_output(path);
  save_params(out, params, meta);
}

// --- entry-level set and weights ---------------------------------------------

std::set<ClassId> load_entry_set(const std::string& path, const Taxonomy* validate) {
  auto in = open_input(path);
  std::set<ClassId> out;
  for_data_lines(in, [&](long line_no, const std::string& line) {
    if (line.find('\t') != std::string::npos) {
      throw ParseError(path, line_no, "expected one class per line");
    }
    if (validate && !validate->contains(line)) {
      throw UnknownClassError(line + " (" + path + ":" + std::to_string(line_no) + ")");
    }
    out.insert(line);
  });
  if (out.empty()) throw EmptyInputError("no classes in " + path);
  return out;
}

std::map<ClassId, double> load_weights(const std::string& path) {
  auto in = open_input(path);
  std::map<ClassId, double> out;
  for_data_lines(in, [&](long line_no, const std::string& line) {
    auto fields = split_tabs(line);
    if (fields.size() != 2) throw ParseError(path, line_no, "expected 'class<TAB>weight'");
    double w = parse_number(fields[1], path, line_no);
    if (!(w > 0.0)) throw ParseError(path, line_no, "weights must be positive");
    out[fields[0]] = w;
  });
  if (out.empty()) throw EmptyInputError("no weights in " + path);
  return out;
}

// --- predictions and reports ---------------------------------------------------

void save_predictions(const std::string& path, const std::map<std::string, ClassId>& predictions,
                      const MetaHeader& meta) {
  auto out = open_output(path);
  out << format_meta_header(meta);
  for (const auto& [instance, class_id] : predictions) {
    out << instance << '\t' << class_id << '\n';
  }
}

void save_eval_report(std::ostream& os, const EvalReport& report, const MetaHeader& meta) {
  os << format_meta_header(meta);
  char buf[160];
  os << "instance_id,p_lca,r_lca,f_lca\n";
  for (const auto& row : report.per_instance) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f\n", row.instance_id.c_str(), row.precision,
                  row.recall, row.f1);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "mean,%.6f,%.6f,%.6f\n", report.mean_precision,
                report.mean_recall, report.mean_f1);
  os << buf;
  std::snprintf(buf, sizeof buf, "stddev,%.6f,%.6f,%.6f\n", report.std_precision,
                report.std_recall, report.std_f1);
  os << buf;
}

void save_eval_report(const std::string& path, const EvalReport& report, const MetaHeader& meta) {
  auto out = open_output(path);
  save_eval_report(out, report, meta);
}

void save_soft_labels(const std::string& path, const SoftLabels& labels, const MetaHeader& meta) {
  auto out = open_output(path);
  out << format_meta_header(meta);
  for (const auto& [instance, class_probs] : labels.q) {
    for (const auto& [class_id, prob] : class_probs) {
      out << instance << '\t' << class_id << '\t' << format_double(prob) << '\n';
    }
  }
}

void save_trace(const std::string& path, const std::vector<double>& log_likelihood,
                const MetaHeader& meta) {
  auto out = open_output(path);
  out << format_meta_header(meta);
  out << "iter\tlog_evidence\n";
  for (std::size_t i = 0; i < log_likelihood.size(); ++i) {
    out << i << '\t' << format_double(log_likelihood[i]) << '\n';
  }
}

}  // namespace taxagg
