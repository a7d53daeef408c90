#include <hocp/artifacts.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#ifndef HOCP_SOURCE_DIR
#define HOCP_SOURCE_DIR "."
#endif

namespace hocp {

using Json = nlohmann::json;

namespace {

std::vector<double> as_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec as_vec(const Json& j) {
  const std::vector<double> v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

// JSON has no infinity; store non-finite values as null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
double number(const Json& j) { return j.is_null() ? kInf : j.get<double>(); }

}  // namespace

Json to_json(const SolutionRecord& r) {
  Json j;
  j["status"] = r.status;
  j["problem"] = r.problem;
  j["config"] = r.config;
  j["x"] = as_std(r.x);
  j["y"] = as_std(r.y);
  j["s"] = as_std(r.s);
  j["psi"] = number(r.psi);
  j["psi_delta"] = r.psi_delta;
  j["viol_norm"] = number(r.viol_norm);
  j["objective"] = number(r.objective);
  j["mu_final"] = r.mu_final;
  j["counters"] = r.counters.is_null() ? Json::object() : r.counters;
  j["layout_ref"] = r.layout_ref;
  return j;
}

SolutionRecord solution_from_json(const Json& j) {
  SolutionRecord r;
  try {
    r.status = j.at("status").get<std::string>();
    r.problem = j.at("problem").get<std::string>();
    r.config = j.value("config", Json::object());
    r.x = as_vec(j.at("x"));
    r.y = as_vec(j.at("y"));
    r.s = as_vec(j.at("s"));
    r.psi = number(j.value("psi", Json(nullptr)));
    r.psi_delta = j.value("psi_delta", 1.0);
    r.viol_norm = number(j.value("viol_norm", Json(nullptr)));
    r.objective = number(j.value("objective", Json(nullptr)));
    r.mu_final = j.value("mu_final", 0.0);
    r.counters = j.value("counters", Json::object());
    r.layout_ref = j.value("layout_ref", std::string());
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed solution.json: ") + e.what());
  }
  return r;
}

SolutionRecord read_solution(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open " + path.string());
  Json j;
  try {
    is >> j;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return solution_from_json(j);
}

void write_solution(const fs::path& path, const SolutionRecord& r) {
  write_file_atomic(path, to_json(r).dump(2) + "\n");
}

Json counters_json(const AlmReport& r) {
  return Json{{"outer_iters", r.outer_iters},
              {"n_f", r.counters.n_f},
              {"n_grad", r.counters.n_grad},
              {"n_c", r.counters.n_c},
              {"n_jac", r.counters.n_jac},
              {"node_limit_hits", r.node_limit_hits},
              {"inner_iters", [&] {
                 long total = 0;
                 for (const auto& it : r.trace) total += it.inner_iters;
                 return total;
               }()},
              {"milp_nodes", [&] {
                 long total = 0;
                 for (const auto& it : r.trace) total += static_cast<long>(it.milp_nodes);
                 return total;
               }()}};
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  for (const auto& f : m.outputs)
    if (!fs::exists(dir / f)) throw std::runtime_error("manifest lists missing output " + f);
  Json j{{"command", m.command},       {"config_path", m.config_path}, {"seed", m.seed},
         {"solver", m.solver},         {"git_describe", m.git_describe}, {"timings_ms", m.timings_ms},
         {"outputs", m.outputs}};
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

std::string git_describe() {
  const std::string cmd = std::string("git -C \"") + HOCP_SOURCE_DIR + "\" describe --always --dirty 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return "unknown";
  std::array<char, 256> buf{};
  std::string out;
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
  const int rc = pclose(pipe);
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return rc == 0 && !out.empty() ? out : "unknown";
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 400, L = 60, R = 150, Tm = 40, B = 50;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      if (s.step && i > 0) os << px(s.x[i]) << ',' << py(s.y[i - 1]) << ' ';
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = Tm + 16 * k + 6;
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

Json alm_config_json(const AlmConfig& c) {
  return Json{{"mu1", c.mu1},
              {"eps1", c.eps1},
              {"eps_p", c.eps_p},
              {"eps_d", c.eps_d},
              {"kappa_mu", c.kappa_mu},
              {"theta_mu", c.theta_mu},
              {"kappa_eps", c.kappa_eps},
              {"y_bound", c.y_bound},
              {"max_outer", c.max_outer},
              {"flavor", c.flavor == PolyNorm::LInfReal ? "linf" : "l1"},
              {"max_inner_failures", c.max_inner_failures},
              {"adaptive_mu1", c.adaptive_mu1},
              {"inner",
               {{"delta0", c.inner.delta0},
                {"delta_min", c.inner.delta_min},
                {"delta_max", c.inner.delta_max},
                {"eta_accept", c.inner.eta_accept},
                {"eta_expand", c.inner.eta_expand},
                {"max_iters", c.inner.max_iters}}},
              {"milp", {{"node_limit", c.milp.node_limit}, {"gap_tol", c.milp.gap_tol}}}};
}

}  // namespace hocp
