#ifndef PPD_DIAGNOSTICS_HPP
#define PPD_DIAGNOSTICS_HPP

/*!@file
 * Diagnostic view of the product-of-projections spectrum: histogram, the
 * bootstrap band [1 - eps1_hat, 1], the random-direction band [0, sqrt(l+)],
 * the limiting noise density on the singular-value scale and, for simulated
 * data, the noiseless spectrum and the cluster intervals. Serializes to JSON
 * and renders to a standalone SVG.
 *
 * JSON layout:
 *   {"spectrum": [..], "green_band": [lo, 1], "blue_band": [0, hi],
 *    "density": [[s, g], ..], "truth_lines": [..], "theorem1_intervals": [[lo, hi] x3],
 *    "histogram": {"edges": [..], "counts": [..]}}
 * truth_lines and theorem1_intervals are omitted when absent.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppd/decompose.hpp"
#include "ppd/json_text.hpp"
#include "ppd/noise_spectrum.hpp"
#include "ppd/oracle.hpp"
#include "ppd/simulation.hpp"

namespace ppd {

inline constexpr int kHistogramBins = 40;
inline constexpr int kDensitySamples = 201;

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

struct DiagnosticReport {
  std::vector<double> spectrum;  ///< sigma(M_hat), descending
  Interval green_band;           ///< [1 - eps1_hat, 1]
  Interval blue_band;            ///< [0, sqrt(lambda_plus)]
  std::vector<std::array<double, 2>> density;  ///< (s, 2 s f(s^2)) on [sqrt(l-), sqrt(l+)]
  std::optional<std::vector<double>> truth_lines;
  std::optional<std::array<Interval, 3>> theorem1;
  Histogram histogram;

  friend bool operator==(const DiagnosticReport&, const DiagnosticReport&) = default;
};

/// Uniform bins on [0, 1]; the last bin is closed on the right.
inline Histogram make_histogram(const std::vector<double>& values, int bins = kHistogramBins) {
  if (bins < 1) throw InvalidInput("histogram needs at least one bin");
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    const double c = std::clamp(v, 0.0, 1.0);
    const int b = std::min(bins - 1, static_cast<int>(std::floor(c * bins)));
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

/// Density samples on the singular-value scale, endpoints nudged inside the support.
inline std::vector<std::array<double, 2>> density_curve(const NoiseSpectrumLaw& law, int samples = kDensitySamples) {
  std::vector<std::array<double, 2>> out;
  const double lo = std::sqrt(law.lambda_minus);
  const double hi = std::sqrt(law.lambda_plus);
  if (!(hi > lo) || samples < 2) return out;
  const double inset = 1e-9 * (hi - lo);
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    double s = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
    s = std::clamp(s, lo + inset, hi - inset);
    out.push_back({s, noise_density_sv(law, s)});
  }
  return out;
}

/// Nonzero singular values of P_col(X_a) P_col(X_b) for the planted signals.
inline std::vector<double> noiseless_spectrum(const SimTruth& truth, std::size_t a, std::size_t b) {
  const PlantedSubspaces planted = truth.pair(a, b);
  const Vector s = principal_spectrum(planted.signal(0), planted.signal(1));
  std::vector<double> out;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-8) out.push_back(s(i));
  return out;
}

inline DiagnosticReport build_report(const DecompositionResult& result, const SimTruth* truth = nullptr) {
  DiagnosticReport r;
  r.spectrum.assign(result.spectrum.values.data(), result.spectrum.values.data() + result.spectrum.values.size());
  r.green_band = {std::clamp(result.spectrum.bootstrap_threshold, 0.0, 1.0), 1.0};
  r.blue_band = {0.0, std::clamp(result.spectrum.noise_threshold, 0.0, 1.0)};
  r.density = density_curve(result.noise_law);
  r.histogram = make_histogram(r.spectrum);
  if (truth != nullptr) {
    std::size_t a = 0;
    std::size_t b = 1;
    if (!result.pairs.empty()) {
      a = result.pairs[result.reporting_pair].first;
      b = result.pairs[result.reporting_pair].second;
    }
    r.truth_lines = noiseless_spectrum(*truth, a, b);
    const PlantedSubspaces planted = truth->pair(a, b);
    const EpsilonPair eps = true_epsilons(planted.signal(0), planted.signal(1), result.marginal_bases.at(a),
                                          result.marginal_bases.at(b));
    r.theorem1 = theorem1_intervals(planted, eps.epsilon1, eps.epsilon2).cluster_intervals;
  }
  return r;
}

inline DiagnosticReport build_report(const DecompositionResult& result, const std::optional<SimTruth>& truth) {
  return build_report(result, truth ? &*truth : nullptr);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json report_to_json(const DiagnosticReport& r) {
  nlohmann::json j;
  j["spectrum"] = r.spectrum;
  j["green_band"] = {r.green_band.lo, r.green_band.hi};
  j["blue_band"] = {r.blue_band.lo, r.blue_band.hi};
  nlohmann::json dens = nlohmann::json::array();
  for (const auto& p : r.density) dens.push_back({p[0], p[1]});
  j["density"] = std::move(dens);
  if (r.truth_lines) j["truth_lines"] = *r.truth_lines;
  if (r.theorem1) {
    nlohmann::json iv = nlohmann::json::array();
    for (const auto& i : *r.theorem1) iv.push_back({i.lo, i.hi});
    j["theorem1_intervals"] = std::move(iv);
  }
  j["histogram"] = {{"edges", r.histogram.edges}, {"counts", r.histogram.counts}};
  return j;
}

inline std::string export_json(const DiagnosticReport& r) { return report_to_json(r).dump(2) + "\n"; }

namespace detail {

inline Interval interval_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput(std::string(key) + " must be a [lo, hi] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace detail

inline DiagnosticReport report_from_json(const nlohmann::json& j) {
  try {
    DiagnosticReport r;
    r.spectrum = j.at("spectrum").get<std::vector<double>>();
    r.green_band = detail::interval_from_json(j.at("green_band"), "green_band");
    r.blue_band = detail::interval_from_json(j.at("blue_band"), "blue_band");
    for (const auto& p : j.at("density")) {
      if (!p.is_array() || p.size() != 2) throw InvalidInput("density entries must be [s, g] pairs");
      r.density.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    if (j.contains("truth_lines")) r.truth_lines = j.at("truth_lines").get<std::vector<double>>();
    if (j.contains("theorem1_intervals")) {
      const auto& iv = j.at("theorem1_intervals");
      if (!iv.is_array() || iv.size() != 3) throw InvalidInput("theorem1_intervals must hold three intervals");
      std::array<Interval, 3> t;
      for (std::size_t i = 0; i < 3; ++i) t[i] = detail::interval_from_json(iv.at(i), "theorem1_intervals");
      r.theorem1 = t;
    }
    r.histogram.edges = j.at("histogram").at("edges").get<std::vector<double>>();
    r.histogram.counts = j.at("histogram").at("counts").get<std::vector<std::size_t>>();
    if (r.histogram.edges.size() != r.histogram.counts.size() + 1)
      throw InvalidInput("histogram needs one more edge than counts");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed diagnostic report: ") + e.what());
  }
}

inline DiagnosticReport parse_report_json(const std::string& text) {
  return report_from_json(parse_json_text(text, "diagnostic report"));
}

// ---------------------------------------------------------------------------
// SVG

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace detail

/// Standalone SVG 1.1 document. Output depends only on the report and size.
inline std::string render_svg(const DiagnosticReport& r, int width = 640, int height = 400) {
  if (width < 100 || height < 100) throw InvalidInput("SVG size must be at least 100 x 100");
  using detail::fmt;
  const double left = 56.0, right = 16.0, top = 16.0, bottom = 44.0;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const std::size_t max_count =
      r.histogram.counts.empty() ? 0 : *std::max_element(r.histogram.counts.begin(), r.histogram.counts.end());
  const double ymax = static_cast<double>(std::max<std::size_t>(max_count, 1)) * 1.1;
  const auto sx = [&](double v) { return left + pw * std::clamp(v, 0.0, 1.0); };
  const auto sy = [&](double c) { return top + ph * (1.0 - std::clamp(c / ymax, 0.0, 1.0)); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"white\"/>\n";

  const bool has_data = !r.spectrum.empty();
  if (has_data) {
    const auto band = [&](const Interval& iv, const char* name, const char* colour) {
      svg += "<rect class=\"band\" id=\"" + std::string(name) + "\" x=\"" + fmt(sx(iv.lo)) + "\" y=\"" + fmt(top) +
             "\" width=\"" + fmt(sx(iv.hi) - sx(iv.lo)) + "\" height=\"" + fmt(ph) + "\" fill=\"" + colour +
             "\" fill-opacity=\"0.25\"/>\n";
    };
    band(r.blue_band, "blue-band", "#1f5fbf");
    band(r.green_band, "green-band", "#2e9e44");

    for (std::size_t i = 0; i < r.histogram.counts.size(); ++i) {
      if (r.histogram.counts[i] == 0) continue;
      const double x0 = sx(r.histogram.edges[i]);
      const double x1 = sx(r.histogram.edges[i + 1]);
      const double y = sy(static_cast<double>(r.histogram.counts[i]));
      svg += "<rect class=\"bar\" x=\"" + fmt(x0) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(x1 - x0) +
             "\" height=\"" + fmt(top + ph - y) + "\" fill=\"#8c8c8c\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }

    if (r.density.size() >= 2) {
      // Scale the curve so that its area matches the histogram area of the
      // values inside the blue band.
      std::size_t below = 0;
      for (double v : r.spectrum)
        if (v <= r.blue_band.hi) ++below;
      double area = 0.0;
      for (std::size_t i = 1; i < r.density.size(); ++i)
        area += 0.5 * (r.density[i][1] + r.density[i - 1][1]) * (r.density[i][0] - r.density[i - 1][0]);
      const double bin_width = r.histogram.edges.size() > 1 ? r.histogram.edges[1] - r.histogram.edges[0] : 1.0;
      const double scale = area > 0.0 ? static_cast<double>(below) * bin_width / area : 0.0;
      svg += "<polyline class=\"density\" fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < r.density.size(); ++i) {
        if (i > 0) svg += ' ';
        svg += fmt(sx(r.density[i][0])) + "," + fmt(sy(scale * r.density[i][1]));
      }
      svg += "\"/>\n";
    }
  }

  if (r.truth_lines) {
    for (double v : *r.truth_lines)
      svg += "<line class=\"truth\" x1=\"" + fmt(sx(v)) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(sx(v)) +
             "\" y2=\"" + fmt(top + ph) + "\" stroke=\"#d62728\" stroke-width=\"1\"/>\n";
  }
  if (r.theorem1) {
    const char* names[3] = {"joint", "nonorthogonal", "noise"};
    for (std::size_t i = 0; i < 3; ++i) {
      const Interval& iv = (*r.theorem1)[i];
      const double y = top + ph + 6.0 + 4.0 * static_cast<double>(i);
      svg += "<line class=\"interval\" id=\"interval-" + std::string(names[i]) + "\" x1=\"" + fmt(sx(iv.lo)) +
             "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(sx(iv.hi)) + "\" y2=\"" + fmt(y) +
             "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    }
  }

  // Axes, ticks and labels.
  svg += "<line class=\"axis\" x1=\"" + fmt(left) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(left + pw) +
         "\" y2=\"" + fmt(top + ph) + "\" stroke=\"black\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
         fmt(top + ph) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    svg += "<text x=\"" + fmt(sx(v)) + "\" y=\"" + fmt(top + ph + 24.0) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + fmt(v).substr(0, 3) + "</text>\n";
  }
  const std::size_t ticks = std::max<std::size_t>(max_count, 1);
  const std::size_t step = std::max<std::size_t>(1, (ticks + 4) / 5);
  for (std::size_t c = 0; c <= ticks; c += step)
    svg += "<text x=\"" + fmt(left - 6.0) + "\" y=\"" + fmt(sy(static_cast<double>(c)) + 3.0) +
           "\" font-size=\"10\" text-anchor=\"end\">" + std::to_string(c) + "</text>\n";
  svg += "<text class=\"label\" x=\"" + fmt(left + pw / 2.0) + "\" y=\"" + fmt(height - 6.0) +
         "\" font-size=\"12\" text-anchor=\"middle\">singular value</text>\n";
  svg += "<text class=\"label\" x=\"14\" y=\"" + fmt(top + ph / 2.0) +
         "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " + fmt(top + ph / 2.0) +
         ")\">count</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace ppd

#endif  // PPD_DIAGNOSTICS_HPP
