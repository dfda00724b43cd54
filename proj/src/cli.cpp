#include "murmur/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "murmur/errors.hpp"
#include "murmur/traces.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace murmur::cli {

namespace {

std::string fmt12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

long long scale_floor(const Rational& q, long long x) {
  return checked_cast_ll(checked_mul(q.num, i128(x)) / q.den);
}

Rational parse_ratio(const std::string& s) {
  auto parse_ll = [&](const std::string& part) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw validation_error("cannot parse rational '" + s + "'");
    return std::stoll(part);
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(parse_ll(s));
  long long den = parse_ll(s.substr(slash + 1));
  if (den == 0) throw validation_error("zero denominator in '" + s + "'");
  return Rational(parse_ll(s.substr(0, slash)), den);
}

}  // namespace

const std::vector<CatalogEntry>& experiment_catalog() {
  using experiments::Family;
  using arith::DiscriminantClass;
  using ingest::DataKind;
  static const std::vector<CatalogEntry> entries = {
      {"delta", Family::MfDelta, 0, DiscriminantClass::NotClassified, false, DataKind::Newforms,
       false, "averaged w-weighted newspace traces over a squarefree level window"},
      {"no-root", Family::MfNoRoot, 0, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "sqrt(N)-weighted trace averages without a root-number split"},
      {"mobius", Family::MfMobiusPart, 0, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false,
       "no-root average decomposed into mobius and class number parts plus the p/X^2 overlay"},
      {"mobius-slope", Family::MfMobiusPart, 0, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, true,
       "least-squares slope of the mobius part as the window base sweeps up to X"},
      {"mf-fixed-root", Family::MfFixedRootData, 0, DiscriminantClass::NotClassified, true,
       DataKind::Newforms, false, "per-root-sign averages from a newform table"},
      {"ec-fixed-root", Family::EcFixedRootData, 0, DiscriminantClass::NotClassified, true,
       DataKind::Curves, false, "per-root-sign point-count averages from a curve table"},
      {"ec-no-root", Family::EcNoRootData, 0, DiscriminantClass::NotClassified, true,
       DataKind::Curves, false, "sqrt(N)-weighted curve averages without a root-number split"},
      {"al-eigenspace", Family::AlEigenspace, 0, DiscriminantClass::NotClassified, true,
       DataKind::Newforms, false, "per sign-pattern averages over two-prime levels"},
      {"class-sum-a0", Family::ClassSum, 0, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "class number averages, arguments s^2 N^2 - 4Np"},
      {"class-sum-a1", Family::ClassSum, 1, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "class number averages, arguments s^2 p^2 - 4Np"},
      {"class-sum-a2", Family::ClassSum, 2, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "class number averages, arguments s^2 + 1 - 3Np"},
      {"class-sum-a3", Family::ClassSum, 3, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "class number averages, arguments s N^3 - 4N^2 p"},
      {"class-sum-a4", Family::ClassSum, 4, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "class number averages, arguments s^2 N^3 - tN - 4N^2 p"},
      {"lvalue-d", Family::LValueOverD, 0, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "normalized L-value averages against the twist discriminant"},
      {"lvalue-p", Family::LValueOverP, 0, DiscriminantClass::NotClassified, false,
       DataKind::Newforms, false, "normalized L-value averages against the Hecke index"},
      {"bqf-odd1", Family::Bqf, 0, DiscriminantClass::Odd1Mod8, false, DataKind::Newforms, false,
       "character sums over odd discriminants with -D = 1 mod 8"},
      {"bqf-odd5", Family::Bqf, 0, DiscriminantClass::Odd5Mod8, false, DataKind::Newforms, false,
       "character sums over odd discriminants with -D = 5 mod 8"},
      {"bqf-even1", Family::Bqf, 0, DiscriminantClass::Even1Mod4, false, DataKind::Newforms,
       false, "character sums over discriminants 4d with d = 1 mod 4"},
      {"bqf-even3", Family::Bqf, 0, DiscriminantClass::Even3Mod4, false, DataKind::Newforms,
       false, "character sums over discriminants 4d with d = 3 mod 4"},
  };
  return entries;
}

const CatalogEntry* find_experiment(const std::string& name) {
  for (const auto& e : experiment_catalog())
    if (name == e.name) return &e;
  return nullptr;
}

std::string render_csv(const std::vector<experiments::SeriesPoint>& points) {
  auto rows = points;
  std::sort(rows.begin(), rows.end(),
            [](const experiments::SeriesPoint& a, const experiments::SeriesPoint& b) {
              if (a.class_tag != b.class_tag) return a.class_tag < b.class_tag;
              return a.x < b.x;
            });
  std::string out = "x,x_scaled,value,class\n";
  for (const auto& pt : rows) {
    out += std::to_string(pt.x);
    out += ',';
    out += fmt12(pt.x_scaled.to_double());
    out += ',';
    out += fmt12(pt.value.to_double());
    out += ',';
    out += pt.class_tag;
    out += '\n';
  }
  return out;
}

std::vector<CsvRow> parse_series_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  long long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "x,x_scaled,value,class")
        throw validation_error("expected header x,x_scaled,value,class", line_no);
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4) throw validation_error("expected 4 fields", line_no);
    CsvRow row;
    try {
      std::size_t used = 0;
      row.x = std::stoll(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("x");
      row.x_scaled = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("x_scaled");
      row.value = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("value");
    } catch (const std::exception&) {
      throw validation_error("malformed numeric field", line_no);
    }
    if (fields[3].empty()) throw validation_error("empty class tag", line_no);
    row.class_tag = fields[3];
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw validation_error("missing CSV header", 1);
  return rows;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

}  // namespace

std::string svg_scatter(const std::vector<CsvRow>& rows) {
  const double width = 960, height = 600;
  const double ml = 70, mr = 180, mt = 30, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  // class order = first appearance; palette positional unless the classes
  // are sign patterns, which carry fixed colors
  std::vector<std::string> classes;
  for (const auto& r : rows)
    if (std::find(classes.begin(), classes.end(), r.class_tag) == classes.end())
      classes.push_back(r.class_tag);
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  static const std::map<std::string, const char*> kSignColors = {
      {"++", "#1f77b4"}, {"--", "#2ca02c"}, {"+-", "#d62728"}, {"-+", "#ff7f0e"}};
  bool sign_patterns = !classes.empty();
  for (const auto& c : classes)
    if (kSignColors.find(c) == kSignColors.end()) sign_patterns = false;
  std::map<std::string, std::string> color;
  for (std::size_t i = 0; i < classes.size(); ++i)
    color[classes[i]] =
        sign_patterns ? kSignColors.at(classes[i]) : kPalette[i % (sizeof kPalette / sizeof *kPalette)];

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!rows.empty()) {
    xmin = xmax = rows[0].x_scaled;
    ymin = ymax = rows[0].value;
    for (const auto& r : rows) {
      xmin = std::min(xmin, r.x_scaled);
      xmax = std::max(xmax, r.x_scaled);
      ymin = std::min(ymin, r.value);
      ymax = std::max(ymax, r.value);
    }
    if (xmax == xmin) (xmax += 0.5), (xmin -= 0.5);
    if (ymax == ymin) (ymax += 1.0), (ymin -= 1.0);
    double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }
  auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) { return mt + (ymax - v) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"600\" "
         "viewBox=\"0 0 960 600\">\n";
  svg += "<rect width=\"960\" height=\"600\" fill=\"#ffffff\"/>\n";

  for (int i = 0; i <= 5; ++i) {
    double tx = xmin + (xmax - xmin) * i / 5.0;
    double ty = ymin + (ymax - ymin) * i / 5.0;
    std::string gx = fmt2(sx(tx)), gy = fmt2(sy(ty));
    svg += "<line x1=\"" + gx + "\" y1=\"" + fmt2(mt) + "\" x2=\"" + gx + "\" y2=\"" +
           fmt2(mt + ph) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<line x1=\"" + fmt2(ml) + "\" y1=\"" + gy + "\" x2=\"" + fmt2(ml + pw) + "\" y2=\"" +
           gy + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + gx + "\" y=\"" + fmt2(mt + ph + 18) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + fmt4(tx) +
           "</text>\n";
    svg += "<text x=\"" + fmt2(ml - 6) + "\" y=\"" + gy +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" "
           "dominant-baseline=\"middle\">" +
           fmt4(ty) + "</text>\n";
  }
  if (ymin < 0 && ymax > 0)
    svg += "<line x1=\"" + fmt2(ml) + "\" y1=\"" + fmt2(sy(0)) + "\" x2=\"" + fmt2(ml + pw) +
           "\" y2=\"" + fmt2(sy(0)) + "\" stroke=\"#999999\"/>\n";
  svg += "<rect x=\"" + fmt2(ml) + "\" y=\"" + fmt2(mt) + "\" width=\"" + fmt2(pw) +
         "\" height=\"" + fmt2(ph) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
  svg += "<text x=\"" + fmt2(ml + pw / 2) + "\" y=\"" + fmt2(height - 10) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">x / X</text>\n";

  for (const auto& r : rows) {
    svg += "<circle cx=\"" + fmt2(sx(r.x_scaled)) + "\" cy=\"" + fmt2(sy(r.value)) +
           "\" r=\"2\" fill=\"" + color[r.class_tag] + "\" fill-opacity=\"0.8\"/>\n";
  }

  double ly = mt + 10;
  for (const auto& c : classes) {
    svg += "<rect x=\"" + fmt2(width - mr + 20) + "\" y=\"" + fmt2(ly - 9) +
           "\" width=\"12\" height=\"12\" fill=\"" + color[c] + "\"/>\n";
    svg += "<text x=\"" + fmt2(width - mr + 38) + "\" y=\"" + fmt2(ly + 1) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(c) + "</text>\n";
    ly += 20;
  }
  svg += "</svg>\n";
  return svg;
}

namespace {

struct RunFlags {
  std::string name;
  long long x = 0;
  std::string beta_str = "2";
  std::string ratio_str = "4";
  int smooth = 0;
  std::string data;
  std::string cache;
  int threads = 0;
  std::string out = ".";
  std::string xi_policy = "strict";
  long long al_p = 0;
  long long level_floor = 11;
};

void atomic_write(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw resource_error("cannot write " + tmp.string());
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw resource_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

arith::FactorTable cached_factor_table(const std::string& cache_dir, long long limit) {
  if (cache_dir.empty()) return arith::FactorTable::build(limit);
  fs::path path = fs::path(cache_dir) / "factor.murm";
  if (fs::exists(path)) {
    try {
      auto t = ingest::load_factor_table(path.string());
      if (t.limit >= limit) return t;
      std::cerr << "cache " << path.string() << " stops at " << t.limit << ", need " << limit
                << "; rebuilding\n";
    } catch (const std::exception& e) {
      std::cerr << "warning: unusable cache " << path.string() << " (" << e.what()
                << "); rebuilding\n";
    }
  }
  auto t = arith::FactorTable::build(limit);
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  ingest::save_factor_table(tmp.string(), t);
  fs::rename(tmp, path);
  return t;
}

quadforms::HurwitzTable cached_hurwitz_table(const std::string& cache_dir, long long limit) {
  if (cache_dir.empty()) return quadforms::HurwitzTable::build(limit);
  fs::path path = fs::path(cache_dir) / "hurwitz.murm";
  if (fs::exists(path)) {
    try {
      auto t = ingest::load_hurwitz_table(path.string());
      if (t.limit >= limit) return t;
      std::cerr << "cache " << path.string() << " stops at " << t.limit << ", need " << limit
                << "; rebuilding\n";
    } catch (const std::exception& e) {
      std::cerr << "warning: unusable cache " << path.string() << " (" << e.what()
                << "); rebuilding\n";
    }
  }
  auto t = quadforms::HurwitzTable::build(limit);
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  ingest::save_hurwitz_table(tmp.string(), t);
  fs::rename(tmp, path);
  return t;
}

// table coverage needed per family; hurwitz capped, larger arguments fall
// back to on-demand evaluation
struct TablePlan {
  long long factor = 0;
  long long hurwitz = 0;
};

constexpr long long kHurwitzCap = 1LL << 27;

TablePlan plan_tables(const CatalogEntry& entry, const experiments::ExperimentConfig& cfg) {
  using experiments::Family;
  long long bx = scale_floor(cfg.beta, cfg.x);
  long long px = scale_floor(cfg.x_max_ratio, cfg.x);
  TablePlan plan;
  switch (entry.family) {
    case Family::MfDelta:
      plan.factor = bx;
      plan.hurwitz = std::min(4 * bx * px, kHurwitzCap);
      break;
    case Family::MfNoRoot:
    case Family::MfMobiusPart:
      plan.factor = bx;
      plan.hurwitz = 4 * px;
      break;
    case Family::ClassSum: {
      plan.factor = bx;
      long long need = 0;
      switch (entry.class_variant) {
        case 0:
        case 1:
          need = 4 * bx * px;
          break;
        case 2:
          need = 3 * bx * px;
          break;
        default: {
          i128 cube = checked_mul(checked_mul(i128(4) * bx, i128(bx)), i128(px));
          need = cube > i128(kHurwitzCap) ? kHurwitzCap : static_cast<long long>(cube) + bx;
          break;
        }
      }
      plan.hurwitz = std::min(need, kHurwitzCap);
      break;
    }
    case Family::LValueOverD:
    case Family::LValueOverP:
      plan.factor = std::max(3 * cfg.x, bx) + 1;
      break;
    case Family::Bqf:
      plan.factor = 64;
      break;
    default:
      break;  // data families parse their own inputs
  }
  return plan;
}

std::string policy_name(const arith::XiPolicy& p) {
  return p.mode == arith::XiMode::Resolved ? "resolved" : "strict";
}

int cmd_sieve(long long limit, const std::string& cache_dir) {
  if (limit < 4) throw validation_error("--limit must be at least 4");
  auto t0 = std::chrono::steady_clock::now();
  auto factor = cached_factor_table(cache_dir, limit);
  auto hurwitz = cached_hurwitz_table(cache_dir, limit);
  std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cout << "factor table limit " << factor.limit << ", class number table limit "
            << hurwitz.limit << " in " << fmt2(dt.count()) << "s under " << cache_dir << "\n";
  return 0;
}

experiments::Series slope_sweep_series(const experiments::ExperimentConfig& cfg,
                                       const traces::TraceContext& ctx) {
  experiments::Series out;
  out.config = cfg;
  long long lo = std::min(cfg.x, std::max<long long>(10, cfg.x / 4));
  std::set<long long> bases;
  for (int k = 0; k < 25; ++k) bases.insert(lo + (cfg.x - lo) * k / 24);
  for (long long base : bases) {
    auto sub = cfg;
    sub.x = base;
    sub.smoothing_window = 0;
    auto parts = experiments::mobius_part(sub, ctx);
    auto slope = experiments::fit_slope(parts.mobius, 2, scale_floor(cfg.x_max_ratio, base));
    out.points.push_back(
        {base, Rational(base, cfg.x), Value::rational(slope), "slope"});
    out.diagnostics.xi_skipped_terms += parts.mobius.diagnostics.xi_skipped_terms;
    for (long long n : parts.mobius.diagnostics.excluded_levels)
      out.diagnostics.excluded_levels.push_back(n);
  }
  std::sort(out.diagnostics.excluded_levels.begin(), out.diagnostics.excluded_levels.end());
  out.diagnostics.excluded_levels.erase(
      std::unique(out.diagnostics.excluded_levels.begin(), out.diagnostics.excluded_levels.end()),
      out.diagnostics.excluded_levels.end());
  return out;
}

int cmd_run(const RunFlags& flags) {
  const CatalogEntry* entry = find_experiment(flags.name);
  if (entry == nullptr) {
    std::string names;
    for (const auto& e : experiment_catalog()) names += std::string(" ") + e.name;
    throw validation_error("unknown experiment '" + flags.name + "'; available:" + names);
  }
  if (entry->needs_data && flags.data.empty())
    throw validation_error("experiment '" + flags.name + "' needs --data FILE");

  experiments::ExperimentConfig cfg;
  cfg.family = entry->family;
  cfg.x = flags.x;
  cfg.beta = parse_ratio(flags.beta_str);
  cfg.x_max_ratio = parse_ratio(flags.ratio_str);
  cfg.smoothing_window = flags.smooth;
  cfg.xi_policy = flags.xi_policy == "resolved" ? arith::XiPolicy::resolved()
                                                : arith::XiPolicy::strict();
  cfg.class_sum_variant = entry->class_variant;
  cfg.bqf_class = entry->bqf_class;
  cfg.al_fixed_p = flags.al_p;
  cfg.mr_level_floor = flags.level_floor;
  cfg.validate();

  if (flags.threads > 0) omp_set_num_threads(flags.threads);
  auto t0 = std::chrono::steady_clock::now();

  TablePlan plan = plan_tables(*entry, cfg);
  arith::FactorTable factor_table;
  quadforms::HurwitzTable hurwitz_table;
  if (plan.factor > 0) factor_table = cached_factor_table(flags.cache, plan.factor);
  if (plan.hurwitz > 0) hurwitz_table = cached_hurwitz_table(flags.cache, plan.hurwitz);
  traces::TraceContext ctx{plan.factor > 0 ? &factor_table : nullptr,
                           plan.hurwitz > 0 ? &hurwitz_table : nullptr};

  ingest::Dataset dataset;
  std::string data_digest;
  if (entry->needs_data) {
    dataset = entry->data_kind == ingest::DataKind::Newforms
                  ? ingest::parse_newforms(flags.data)
                  : ingest::parse_curves(flags.data);
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(ingest::fnv1a64_file(flags.data)));
    data_digest = hex;
  }

  using experiments::Family;
  std::vector<experiments::Series> series_list;
  switch (entry->family) {
    case Family::MfDelta:
      series_list.push_back(experiments::mf_delta_series(cfg, ctx));
      break;
    case Family::MfNoRoot:
      series_list.push_back(experiments::mf_no_root_series(cfg, ctx));
      break;
    case Family::MfMobiusPart:
      if (entry->slope_sweep) {
        series_list.push_back(slope_sweep_series(cfg, ctx));
      } else {
        auto parts = experiments::mobius_part(cfg, ctx);
        series_list.push_back(std::move(parts.class_part));
        series_list.push_back(std::move(parts.mobius));
        series_list.push_back(std::move(parts.approx));
      }
      break;
    case Family::MfFixedRootData:
    case Family::EcFixedRootData:
      series_list.push_back(experiments::data_fixed_root_series(cfg, dataset));
      break;
    case Family::EcNoRootData:
      series_list.push_back(experiments::data_no_root_series(cfg, dataset));
      break;
    case Family::AlEigenspace:
      series_list.push_back(experiments::al_eigenspace_series(cfg, dataset));
      break;
    case Family::ClassSum:
      series_list.push_back(experiments::class_sum_series(cfg, ctx));
      break;
    case Family::LValueOverD:
    case Family::LValueOverP:
      series_list.push_back(experiments::lvalue_series(cfg, factor_table));
      break;
    case Family::Bqf:
      series_list.push_back(experiments::bqf_series(cfg, factor_table));
      break;
  }

  experiments::SeriesDiagnostics diag;
  std::vector<experiments::SeriesPoint> points;
  std::set<long long> excluded;
  std::set<std::string> empties;
  for (const auto& s : series_list) {
    points.insert(points.end(), s.points.begin(), s.points.end());
    diag.xi_skipped_terms += s.diagnostics.xi_skipped_terms;
    diag.fp_fallback_points += s.diagnostics.fp_fallback_points;
    diag.axis_cap = std::max(diag.axis_cap, s.diagnostics.axis_cap);
    excluded.insert(s.diagnostics.excluded_levels.begin(), s.diagnostics.excluded_levels.end());
    empties.insert(s.diagnostics.empty_classes.begin(), s.diagnostics.empty_classes.end());
  }
  diag.excluded_levels.assign(excluded.begin(), excluded.end());
  diag.empty_classes.assign(empties.begin(), empties.end());

  if (diag.xi_skipped_terms > 0) {
    std::ostringstream msg;
    msg << diag.xi_skipped_terms << " unresolved xi terms skipped across "
        << diag.excluded_levels.size() << " levels under the " << policy_name(cfg.xi_policy)
        << " policy; refusing to emit a biased series (levels:";
    for (long long n : diag.excluded_levels) msg << " " << n;
    msg << ")";
    throw xi_abort(msg.str());
  }
  for (const auto& tag : diag.empty_classes)
    std::cerr << "warning: class '" << tag << "' has no records in the window\n";

  fs::create_directories(flags.out);
  fs::path csv_path = fs::path(flags.out) / (flags.name + ".csv");
  std::string csv = render_csv(points);
  atomic_write(csv_path, csv);

  std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

  ordered_json manifest;
  manifest["command"] = "run";
  manifest["experiment"] = flags.name;
  manifest["config"] = {{"x", cfg.x},
                        {"beta", cfg.beta.str()},
                        {"xmax_ratio", cfg.x_max_ratio.str()},
                        {"smooth", cfg.smoothing_window},
                        {"xi_policy", policy_name(cfg.xi_policy)},
                        {"class_variant", cfg.class_sum_variant},
                        {"bqf_class", arith::discriminant_class_tag(cfg.bqf_class)},
                        {"al_fixed_p", cfg.al_fixed_p},
                        {"mr_level_floor", cfg.mr_level_floor},
                        {"threads", flags.threads > 0 ? flags.threads : omp_get_max_threads()}};
  manifest["inputs"] = {{"data", entry->needs_data ? ordered_json(flags.data) : ordered_json()},
                        {"data_fnv1a64",
                         entry->needs_data ? ordered_json(data_digest) : ordered_json()}};
  manifest["cache"] = {{"dir", flags.cache.empty() ? ordered_json() : ordered_json(flags.cache)},
                       {"factor_limit", plan.factor},
                       {"hurwitz_limit", plan.hurwitz}};
  manifest["outputs"] = {{"csv", csv_path.string()}};
  manifest["rows"] = points.size();
  manifest["diagnostics"] = {{"xi_skipped_terms", diag.xi_skipped_terms},
                             {"excluded_levels", diag.excluded_levels},
                             {"empty_classes", diag.empty_classes},
                             {"fp_fallback_points", diag.fp_fallback_points},
                             {"axis_cap", diag.axis_cap}};
  manifest["elapsed_seconds"] = dt.count();
  fs::path manifest_path = fs::path(flags.out) / (flags.name + ".manifest.json");
  atomic_write(manifest_path, manifest.dump(2) + "\n");

  std::cout << "wrote " << csv_path.string() << " (" << points.size() << " rows) and "
            << manifest_path.string() << " in " << fmt2(dt.count()) << "s\n";
  return 0;
}

int cmd_plot(const std::string& csv_in, const std::string& svg_out) {
  std::ifstream in(csv_in, std::ios::binary);
  if (!in) throw validation_error("cannot open " + csv_in);
  std::stringstream buf;
  buf << in.rdbuf();
  auto rows = parse_series_csv(buf.str());
  if (rows.empty()) std::cerr << "warning: no data rows in " << csv_in << "; axes only\n";
  atomic_write(svg_out, svg_scatter(rows));
  std::cout << "wrote " << svg_out << " (" << rows.size() << " points)\n";
  return 0;
}

int cmd_ingest(const std::string& path, const std::string& kind) {
  ingest::Dataset ds =
      kind == "newforms" ? ingest::parse_newforms(path) : ingest::parse_curves(path);
  long long total = 0, plus = 0, minus = 0, lo = 0, hi = 0;
  std::map<long long, long long> buckets;  // floor(log2(level)) -> count
  auto note = [&](long long level, int root) {
    ++total;
    (root > 0 ? plus : minus) += 1;
    lo = lo == 0 ? level : std::min(lo, level);
    hi = std::max(hi, level);
    long long k = 0;
    while ((1LL << (k + 1)) <= level) ++k;
    buckets[k] += 1;
  };
  if (ds.kind == ingest::DataKind::Newforms)
    for (const auto& r : ds.newforms) note(r.level, r.global_root);
  else
    for (const auto& r : ds.curves) note(r.conductor, r.global_root);

  std::cout << total << " records (" << kind << ") from " << path << "\n";
  if (total == 0) return 0;
  std::cout << "levels " << lo << ".." << hi << "; root +1: " << plus << ", root -1: " << minus
            << "\n";
  if (ds.kind == ingest::DataKind::Newforms) {
    std::set<int> weights;
    long long dim_total = 0;
    for (const auto& r : ds.newforms) {
      weights.insert(r.weight);
      dim_total += r.orbit_dim;
    }
    std::cout << "orbit dimension total " << dim_total << "; tabulated primes up to " << ds.pmax
              << "; weights:";
    for (int w : weights) std::cout << " " << w;
    std::cout << "\n";
  }
  for (const auto& [k, count] : buckets)
    std::cout << "levels [" << (1LL << k) << ", " << (1LL << (k + 1)) << "): " << count << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"murmuration-average experiment toolkit"};
  app.require_subcommand(1);

  long long sieve_limit = 0;
  std::string sieve_cache = "cache";
  auto* sieve = app.add_subcommand("sieve", "build and cache the factor and class number tables");
  sieve->add_option("--limit", sieve_limit, "table limit")->required();
  sieve->add_option("--cache", sieve_cache, "cache directory");

  RunFlags rf;
  auto* run = app.add_subcommand("run", "run an experiment, writing CSV and a manifest");
  run->add_option("experiment", rf.name, "experiment name (see --list)")->required();
  run->add_option("--x", rf.x, "window base X")->required();
  run->add_option("--beta", rf.beta_str, "window ratio (rational, default 2)");
  run->add_option("--xmax-ratio", rf.ratio_str, "axis extent as a multiple of X (default 4)");
  run->add_option("--smooth", rf.smooth, "smoothing half-width (default 0)");
  run->add_option("--data", rf.data, "input dataset for data-driven experiments");
  run->add_option("--cache", rf.cache, "table cache directory");
  run->add_option("--threads", rf.threads, "worker thread cap");
  run->add_option("--out", rf.out, "output directory (default .)");
  run->add_option("--xi-policy", rf.xi_policy, "strict or resolved (default strict)")
      ->check(CLI::IsMember({"strict", "resolved"}));
  run->add_option("--al-p", rf.al_p, "fixed smaller level prime for al-eigenspace (0 = vary)");
  run->add_option("--level-floor", rf.level_floor, "smallest level for L-value averages");
  run->set_config("--config", "", "TOML config file; flags override");

  std::string plot_csv, plot_svg;
  auto* plot = app.add_subcommand("plot", "render an emitted CSV as an SVG scatter");
  plot->add_option("csv", plot_csv, "input CSV")->required();
  plot->add_option("svg", plot_svg, "output SVG")->required();

  std::string ingest_path, ingest_kind;
  auto* ing = app.add_subcommand("ingest", "parse and validate a dataset, printing a report");
  ing->add_option("path", ingest_path, "input file")->required();
  ing->add_option("--kind", ingest_kind, "newforms or curves")
      ->required()
      ->check(CLI::IsMember({"newforms", "curves"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sieve->parsed()) return cmd_sieve(sieve_limit, sieve_cache);
    if (run->parsed()) return cmd_run(rf);
    if (plot->parsed()) return cmd_plot(plot_csv, plot_svg);
    return cmd_ingest(ingest_path, ingest_kind);
  } catch (const xi_abort& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const unresolved_xi_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const resource_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace murmur::cli
