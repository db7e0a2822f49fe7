#include "anderson/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace anderson {

const char* code_version() { return "0.1.0"; }

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path + " for writing");
  return os;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void write_manifest(const Manifest& m, const std::string& path) {
  auto os = open_out(path);
  os << "{\n";
  os << "  \"schema\": \"anderson-manifest v1\",\n";
  os << "  \"experiment\": \"" << m.experiment << "\",\n";
  os << "  \"code_version\": \"" << code_version() << "\",\n";
  os << "  \"config_hash\": \"" << std::hex << fnv1a64(m.config_json)
     << std::dec << "\",\n";
  os << "  \"timestamp\": \"" << m.timestamp << "\",\n";
  os << "  \"partial\": " << (m.partial ? "true" : "false") << ",\n";
  os << "  \"config\": " << m.config_json << ",\n";
  os << "  \"replica_seeds\": [";
  for (std::size_t i = 0; i < m.replica_seeds.size(); ++i)
    os << (i ? "," : "") << m.replica_seeds[i];
  os << "],\n";
  os << "  \"outputs\": [";
  for (std::size_t i = 0; i < m.outputs.size(); ++i)
    os << (i ? "," : "") << "\"" << m.outputs[i] << "\"";
  os << "]\n}\n";
}

void write_spectrum_run_csv(const SpectrumRunResult& res,
                            const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 spectrum\n";
  os << "replica,n,eigenvalue,residual\n";
  for (std::size_t r = 0; r < res.replicas.size(); ++r)
    for (std::size_t i = 0; i < res.replicas[r].eigenvalues.size(); ++i)
      os << r << "," << i + 1 << "," << fmt(res.replicas[r].eigenvalues[i])
         << "," << fmt(res.replicas[r].residuals[i]) << "\n";
}

void write_convergence_csv(const ConvergenceResult& res,
                           const ExperimentConfig& cfg,
                           const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 converge\n";
  os << "replica,eps_index,eps,C,n,eigenvalue,control_lambda1\n";
  for (const auto& row : res.rows)
    for (std::size_t n = 0; n < row.eigenvalues.size(); ++n) {
      os << row.replica << "," << row.eps_index << "," << fmt(row.eps) << ","
         << fmt(row.constant_C) << "," << n + 1 << ","
         << fmt(row.eigenvalues[n]) << ",";
      if (row.has_control && n == 0) os << fmt(row.control_lambda1);
      os << "\n";
    }
  (void)cfg;
}

void write_scaling_csv(const ScalingResult& res, const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 scaling\n";
  os << "replica,n,lambda_unit,lambda_tilde,lambda_zeta,identity_gap,"
        "tolerance,delta_pred\n";
  for (const auto& row : res.rows)
    for (std::size_t n = 0; n < row.lambda_unit.size(); ++n)
      os << row.replica << "," << n + 1 << "," << fmt(row.lambda_unit[n]) << ","
         << fmt(row.lambda_tilde[n]) << "," << fmt(row.lambda_zeta[n]) << ","
         << fmt(row.identity_gap[n]) << "," << fmt(row.tolerance) << ","
         << fmt(res.delta_pred) << "\n";
}

void write_tail_samples_csv(const TailRecord& rec, int tail_n,
                            const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 tail-samples\n";
  os << "replica,n,eigenvalue\n";
  for (std::size_t r = 0; r < rec.lambdas.size(); ++r)
    os << r << "," << tail_n << "," << fmt(rec.lambdas[r]) << "\n";
}

void write_tail_fit_csv(const TailRecord& rec, const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 tail-fit\n";
  os << "x,exceedances,p_hat,cp_low,cp_high,used_in_fit,slope,ci_low,ci_high,"
        "target,trend_only\n";
  for (const auto& th : rec.thresholds)
    os << fmt(th.x) << "," << th.exceedances << "," << fmt(th.p_hat) << ","
       << fmt(th.cp_low) << "," << fmt(th.cp_high) << ","
       << (th.used_in_fit ? 1 : 0) << "," << fmt(rec.slope) << ","
       << fmt(rec.ci_low) << "," << fmt(rec.ci_high) << "," << fmt(rec.target)
       << "," << (rec.trend_only ? 1 : 0) << "\n";
}

void write_bump_csv(const BumpResult& res, const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 bump\n";
  os << "well,lambda,lower_b,upper_minus3c,within,free_lambda1\n";
  for (std::size_t n = 0; n < res.lambdas.size(); ++n) {
    const bool within =
        res.lambdas[n] >= res.plateau_b - 1e-9 && res.lambdas[n] <= res.upper;
    os << n + 1 << "," << fmt(res.lambdas[n]) << "," << fmt(res.plateau_b)
       << "," << fmt(res.upper) << "," << (within ? 1 : 0) << ","
       << fmt(res.free_lambda1) << "\n";
  }
}

void write_kernel_check_csv(const KernelCheckResult& res,
                            const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 kernel-check\n";
  os << "metric,value\n";
  os << "telescoping_max_err," << fmt(res.telescoping_max_err) << "\n";
  os << "moment_abs," << fmt(res.moment_abs) << "\n";
  os << "boundary_sup," << fmt(res.boundary_sup) << "\n";
  os << "symmetry_err," << fmt(res.symmetry_err) << "\n";
  os << "truncation_shift," << fmt(res.truncation_shift) << "\n";
  os << "truncation_bound," << fmt(res.truncation_bound) << "\n";
  os << "ok," << (res.ok ? 1 : 0) << "\n";
}

void write_renorm_summary_csv(const RenormRunResult& res,
                              const std::string& path) {
  auto os = open_out(path);
  os << "# anderson-csv v1 renorm-summary\n";
  os << "slope_vs_log_eps,eps_c1_spread,mc_value,mc_sigma\n";
  os << fmt(res.slope_vs_log_eps) << "," << fmt(res.eps_c1_spread) << ",";
  if (res.mc_cross)
    os << fmt(res.mc_cross->value) << "," << fmt(res.mc_cross->sigma);
  else
    os << ",";
  os << "\n";
}

void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& xs,
                    const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, bool log_x, bool log_y) {
  const int width = 720, height = 480, margin = 64;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  for (const auto& s : xs)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double v) {
    return margin + (tx(v) - xmin) / (xmax - xmin) * (width - 2 * margin);
  };
  auto py = [&](double v) {
    return height - margin -
           (ty(v) - ymin) / (ymax - ymin) * (height - 2 * margin);
  };
  const char* colors[] = {"#1f6fb4", "#d1495b", "#3a7d44", "#8c5383"};
  auto os = open_out(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-size=\"16\">" << title << "</text>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
     << width - margin << "\" y2=\"" << height - margin
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
     << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", log_x ? std::pow(10.0, fx) : fx);
    os << "<text x=\"" << margin + t * (width - 2 * margin) / 4 << "\" y=\""
       << height - margin + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
       << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.3g", log_y ? std::pow(10.0, fy) : fy);
    os << "<text x=\"" << margin - 6 << "\" y=\""
       << height - margin - t * (height - 2 * margin) / 4 + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 16
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << height / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << height / 2 << ")\">" << ylabel << "</text>\n";
  int ci = 0;
  for (const auto& s : xs) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[ci % 4]
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << px(s.x[i]) << "," << py(s.y[i]) << " ";
    os << "\"/>\n";
    if (!s.label.empty())
      os << "<text x=\"" << width - margin - 6 << "\" y=\""
         << margin + 16 * (ci + 1) << "\" text-anchor=\"end\" font-size=\"12\" "
            "fill=\"" << colors[ci % 4] << "\">" << s.label << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

} // namespace anderson
