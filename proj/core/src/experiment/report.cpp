#include "riskcal/experiment/report.hpp"

#include "riskcal/data/csv.hpp"
#include "riskcal/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <tuple>
#include <sstream>

namespace riskcal::experiment {
namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Keeps first-appearance order of string keys.
class Order {
 public:
  void add(const std::string& s) {
    if (seen_.insert(s).second) items_.push_back(s);
  }
  [[nodiscard]] const std::vector<std::string>& items() const { return items_; }

 private:
  std::set<std::string> seen_;
  std::vector<std::string> items_;
};

std::string num(double v) { return data::format_double(v); }

std::string md_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string md_rule(std::size_t n) {
  std::string out = "|";
  for (std::size_t i = 0; i < n; ++i) out += "---|";
  return out + "\n";
}

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  [[nodiscard]] double value() const { return sum / static_cast<double>(n); }
};

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  const std::string t = lower(text);
  if (t == "csv") return ReportFormat::csv;
  if (t == "md" || t == "markdown") return ReportFormat::markdown;
  throw ConfigError(fmt::format("unknown report format '{}' (csv or md)", text));
}

std::optional<std::pair<double, double>> ReferenceTable::find(const std::string& dataset, double cost) const {
  const auto it = values.find({lower(dataset), cost});
  if (it == values.end()) return std::nullopt;
  return it->second;
}

ReferenceTable load_reference_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open reference table '{}'", path.string()));
  ReferenceTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 4) throw DataError(fmt::format("reference line {}: expected 4 fields", line_no));
    double v[3];
    for (int k = 0; k < 3; ++k) {
      const auto& s = f[static_cast<std::size_t>(k + 1)];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[k]);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError(fmt::format("reference line {}: '{}' is not a number", line_no, s));
      }
    }
    table.values[{lower(f[0]), v[0]}] = {v[1], v[2]};
  }
  return table;
}

std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  Order datasets, regressors, calibrators;
  std::set<double> costs;
  struct Acc {
    Mean rwr, reject, mae, loss;
  };
  std::map<std::tuple<std::string, std::string, std::string, double>, Acc> acc;
  for (const auto& r : rows) {
    if (r.failed()) continue;
    datasets.add(r.dataset);
    regressors.add(r.regressor);
    calibrators.add(r.calibrator);
    costs.insert(r.cost);
    Acc& a = acc[{r.dataset, r.regressor, r.calibrator, r.cost}];
    a.rwr.add(r.rwr_loss);
    a.reject.add(r.reject_rate);
    a.mae.add(r.calib_mae);
    a.loss.add(r.predictor_loss);
  }

  std::vector<AggregateRow> out;
  for (const auto& d : datasets.items()) {
    for (const auto& reg : regressors.items()) {
      for (const double c : costs) {
        const std::size_t group_start = out.size();
        for (const auto& cal : calibrators.items()) {
          const auto it = acc.find({d, reg, cal, c});
          if (it == acc.end()) continue;
          const Acc& a = it->second;
          out.push_back({d, reg, cal, c, a.rwr.n, a.rwr.value(), a.reject.value(), a.mae.value(), a.loss.value(),
                         false});
        }
        if (group_start == out.size()) continue;
        double best = out[group_start].rwr_loss;
        for (std::size_t i = group_start; i < out.size(); ++i) best = std::min(best, out[i].rwr_loss);
        for (std::size_t i = group_start; i < out.size(); ++i) out[i].best_calibrator = out[i].rwr_loss == best;
      }
    }
  }
  // Canonical order: dataset, regressor, calibrator, cost.
  std::vector<AggregateRow> sorted;
  for (const auto& d : datasets.items()) {
    for (const auto& reg : regressors.items()) {
      for (const auto& cal : calibrators.items()) {
        for (const auto& row : out) {
          if (row.dataset == d && row.regressor == reg && row.calibrator == cal) sorted.push_back(row);
        }
      }
    }
  }
  return sorted;
}

std::string render_report(const std::vector<ResultRow>& rows, ReportFormat format, const ReferenceTable* reference) {
  const std::vector<AggregateRow> agg = aggregate(rows);

  if (format == ReportFormat::csv) {
    std::string out =
        "dataset,regressor,calibrator,cost,folds,rwr_loss,reject_rate,calib_mae,predictor_loss,best_calibrator,"
        "selnet,nn_knnrej\n";
    for (const auto& a : agg) {
      std::string sel, knn;
      if (reference) {
        if (const auto ref = reference->find(a.dataset, a.cost)) {
          sel = num(ref->first);
          knn = num(ref->second);
        }
      }
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", a.dataset, a.regressor, a.calibrator, num(a.cost),
                         a.folds, num(a.rwr_loss), num(a.reject_rate), num(a.calib_mae), num(a.predictor_loss),
                         a.best_calibrator ? 1 : 0, sel, knn);
    }
    return out;
  }

  Order datasets, regressors, calibrators;
  std::set<double> costs;
  for (const auto& a : agg) {
    datasets.add(a.dataset);
    regressors.add(a.regressor);
    calibrators.add(a.calibrator);
    costs.insert(a.cost);
  }
  const auto find = [&](const std::string& d, const std::string& reg, const std::string& cal,
                        double c) -> const AggregateRow* {
    for (const auto& a : agg) {
      if (a.dataset == d && a.regressor == reg && a.calibrator == cal && a.cost == c) return &a;
    }
    return nullptr;
  };
  const auto first_of = [&](const std::string& d, const std::string& reg,
                            const std::string& cal) -> const AggregateRow* {
    for (const auto& a : agg) {
      if (a.dataset == d && a.regressor == reg && (cal.empty() || a.calibrator == cal)) return &a;
    }
    return nullptr;
  };

  std::string out = "## Predictor loss\n\n";
  std::vector<std::string> head{"dataset"};
  head.insert(head.end(), regressors.items().begin(), regressors.items().end());
  out += md_row(head) + md_rule(head.size());
  for (const auto& d : datasets.items()) {
    std::vector<std::string> cells{d};
    for (const auto& reg : regressors.items()) {
      const AggregateRow* a = first_of(d, reg, "");
      cells.push_back(a ? num(a->predictor_loss) : "");
    }
    out += md_row(cells);
  }

  out += "\n## Calibrator MAE\n\n";
  head = {"dataset", "regressor"};
  head.insert(head.end(), calibrators.items().begin(), calibrators.items().end());
  out += md_row(head) + md_rule(head.size());
  for (const auto& d : datasets.items()) {
    for (const auto& reg : regressors.items()) {
      if (!first_of(d, reg, "")) continue;
      std::vector<std::string> cells{d, reg};
      for (const auto& cal : calibrators.items()) {
        const AggregateRow* a = first_of(d, reg, cal);
        cells.push_back(a ? num(a->calib_mae) : "");
      }
      out += md_row(cells);
    }
  }

  out += "\n## RwR loss\n\n";
  head = {"dataset", "regressor", "cost"};
  head.insert(head.end(), calibrators.items().begin(), calibrators.items().end());
  if (reference) {
    head.emplace_back("SelNet");
    head.emplace_back("NN+kNNRej");
  }
  out += md_row(head) + md_rule(head.size());
  for (const auto& d : datasets.items()) {
    for (const auto& reg : regressors.items()) {
      for (const double c : costs) {
        std::vector<std::string> cells{d, reg, num(c)};
        bool any = false;
        for (const auto& cal : calibrators.items()) {
          const AggregateRow* a = find(d, reg, cal, c);
          if (!a) {
            cells.emplace_back();
            continue;
          }
          any = true;
          cells.push_back(a->best_calibrator ? "**" + num(a->rwr_loss) + "**" : num(a->rwr_loss));
        }
        if (!any) continue;
        if (reference) {
          const auto ref = reference->find(d, c);
          cells.push_back(ref ? num(ref->first) : "");
          cells.push_back(ref ? num(ref->second) : "");
        }
        out += md_row(cells);
      }
    }
  }
  return out;
}

}  // namespace riskcal::experiment
