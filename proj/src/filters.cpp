#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "heartradar/dsp.hpp"
#include "heartradar/errors.hpp"

namespace heartradar::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

Complex product(const std::vector<Complex>& v, Complex start = {1.0, 0.0}) {
  for (const auto& c : v) start *= c;
  return start;
}

// Quadratic (1, -(r1 + r2), r1 r2) from a root pair.
std::array<double, 3> quadratic(Complex r1, Complex r2) {
  return {1.0, -(r1 + r2).real(), (r1 * r2).real()};
}

// Splits roots into conjugate pairs (complex) and consecutive pairs (real).
std::vector<std::array<double, 3>> root_pairs(std::vector<Complex> roots) {
  constexpr double tol = 1e-12;
  std::vector<Complex> upper;
  std::vector<double> reals;
  for (const auto& r : roots) {
    if (std::abs(r.imag()) <= tol * std::max(1.0, std::abs(r))) {
      reals.push_back(r.real());
    } else if (r.imag() > 0.0) {
      upper.push_back(r);
    }
  }
  std::sort(upper.begin(), upper.end(), [](Complex a, Complex b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a.real() < b.real();
  });
  std::sort(reals.begin(), reals.end());
  std::vector<std::array<double, 3>> out;
  for (const auto& r : upper) out.push_back(quadratic(r, std::conj(r)));
  for (std::size_t i = 0; i < reals.size(); i += 2) {
    if (i + 1 < reals.size()) {
      out.push_back(quadratic(reals[i], reals[i + 1]));
    } else {
      out.push_back({1.0, -reals[i], 0.0});
    }
  }
  return out;
}

void check_cutoff(double f, double sample_rate, const char* what) {
  if (!(f > 0.0)) throw InvalidArgument(std::string("butterworth: ") + what + " must be positive");
  if (f >= 0.5 * sample_rate) {
    throw InvalidArgument(std::string("butterworth: ") + what + " " + std::to_string(f) +
                          " Hz is not below Nyquist " + std::to_string(0.5 * sample_rate) + " Hz");
  }
}

// Direct form II transposed over one section, state updated in place.
void run_section(const Biquad& s, std::vector<double>& x, double z0, double z1) {
  for (double& v : x) {
    const double in = v;
    const double out = s.b[0] * in + z0;
    z0 = s.b[1] * in - s.a[1] * out + z1;
    z1 = s.b[2] * in - s.a[2] * out;
    v = out;
  }
}

// Cascade with steady-state initial conditions for a step of height x[0].
void run_cascade(std::span<const Biquad> sos, std::vector<double>& x) {
  if (x.empty()) return;
  double scale = x.front();
  for (const auto& s : sos) {
    const double dc_gain = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[1] + s.a[2]);
    const double z1 = s.b[2] - s.a[2] * dc_gain;
    const double z0 = dc_gain - s.b[0];
    run_section(s, x, scale * z0, scale * z1);
    scale *= dc_gain;
  }
}

}  // namespace

std::vector<Biquad> butterworth(const FilterSpec& spec, double sample_rate) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("butterworth: sample_rate must be positive");
  if (spec.order < 1) throw InvalidArgument("butterworth: order must be >= 1");
  check_cutoff(spec.low_hz, sample_rate, "cutoff");
  int proto_order = spec.order;
  if (spec.kind == FilterKind::bandstop) {
    check_cutoff(spec.high_hz, sample_rate, "upper stop edge");
    if (spec.high_hz <= spec.low_hz) throw InvalidArgument("butterworth: bandstop edges out of order");
    if (spec.order % 2 != 0) throw InvalidArgument("butterworth: bandstop order must be even");
    proto_order = spec.order / 2;
  }

  std::vector<Complex> proto;
  for (int k = 0; k < proto_order; ++k) {
    proto.push_back(std::polar(1.0, kPi * (2.0 * k + proto_order + 1.0) / (2.0 * proto_order)));
  }

  const double fs2 = 2.0 * sample_rate;
  auto warp = [&](double f) { return fs2 * std::tan(kPi * f / sample_rate); };

  std::vector<Complex> zeros;
  std::vector<Complex> poles;
  double gain = 1.0;
  const Complex inv_neg_prod = 1.0 / product(proto, {1.0, 0.0}) *
                               (proto_order % 2 == 0 ? 1.0 : -1.0);  // 1 / prod(-p)
  switch (spec.kind) {
    case FilterKind::lowpass: {
      const double wo = warp(spec.low_hz);
      for (const auto& p : proto) poles.push_back(wo * p);
      gain = std::pow(wo, proto_order);
      break;
    }
    case FilterKind::highpass: {
      const double wo = warp(spec.low_hz);
      for (const auto& p : proto) poles.push_back(wo / p);
      zeros.assign(static_cast<std::size_t>(proto_order), Complex{});
      gain = inv_neg_prod.real();
      break;
    }
    case FilterKind::bandstop: {
      const double w1 = warp(spec.low_hz);
      const double w2 = warp(spec.high_hz);
      const double bw = w2 - w1;
      const double wo = std::sqrt(w1 * w2);
      for (const auto& p : proto) {
        const Complex hp = (bw / 2.0) / p;
        const Complex d = std::sqrt(hp * hp - wo * wo);
        poles.push_back(hp + d);
        poles.push_back(hp - d);
      }
      for (int k = 0; k < proto_order; ++k) {
        zeros.emplace_back(0.0, wo);
        zeros.emplace_back(0.0, -wo);
      }
      gain = inv_neg_prod.real();
      break;
    }
  }

  // Bilinear transform.
  std::vector<Complex> zd;
  std::vector<Complex> pd;
  Complex num{1.0, 0.0};
  Complex den{1.0, 0.0};
  for (const auto& z : zeros) {
    zd.push_back((fs2 + z) / (fs2 - z));
    num *= (fs2 - z);
  }
  for (const auto& p : poles) {
    pd.push_back((fs2 + p) / (fs2 - p));
    den *= (fs2 - p);
  }
  while (zd.size() < pd.size()) zd.emplace_back(-1.0, 0.0);
  const double gain_d = gain * (num / den).real();

  auto pole_q = root_pairs(pd);
  auto zero_q = root_pairs(zd);
  std::vector<Biquad> sos(pole_q.size());
  for (std::size_t i = 0; i < sos.size(); ++i) {
    sos[i].a = pole_q[i];
    sos[i].b = i < zero_q.size() ? zero_q[i] : std::array<double, 3>{1.0, 0.0, 0.0};
  }
  for (double& b : sos.front().b) b *= gain_d;
  return sos;
}

double magnitude_response(std::span<const Biquad> sos, double freq_hz, double sample_rate) {
  const Complex z1 = std::polar(1.0, -2.0 * kPi * freq_hz / sample_rate);
  const Complex z2 = z1 * z1;
  Complex h{1.0, 0.0};
  for (const auto& s : sos) {
    h *= (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (s.a[0] + s.a[1] * z1 + s.a[2] * z2);
  }
  return std::abs(h);
}

std::vector<double> zero_phase_filter(std::span<const double> x, const FilterSpec& spec,
                                      double sample_rate) {
  const auto sos = butterworth(spec, sample_rate);
  std::size_t taps = 2 * sos.size() + 1;
  const auto zero_b2 = std::count_if(sos.begin(), sos.end(), [](const Biquad& s) { return s.b[2] == 0.0; });
  const auto zero_a2 = std::count_if(sos.begin(), sos.end(), [](const Biquad& s) { return s.a[2] == 0.0; });
  taps -= static_cast<std::size_t>(std::min(zero_b2, zero_a2));
  const std::size_t pad = 3 * taps;
  const std::size_t n = x.size();
  if (n <= pad) {
    throw InvalidArgument("zero_phase_filter: input of " + std::to_string(n) +
                          " samples is too short (need > " + std::to_string(pad) + ")");
  }

  // Odd extension about both end points.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_cascade(sos, ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(sos, ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace heartradar::dsp
