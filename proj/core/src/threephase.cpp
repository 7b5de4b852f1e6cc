#include "lvbal/threephase.hpp"

#include <cmath>

#include "lvbal/errors.hpp"

namespace lvbal {
namespace {

constexpr double kCufFloor = 1e-12;

Phasor polar_deg(double mag, double deg) {
  return std::polar(mag, deg * kPi / 180.0);
}

// a = e^{j 2pi/3}
const Phasor kA = polar_deg(1.0, 120.0);
const Phasor kA2 = kA * kA;

}  // namespace

double nominal_angle_deg(Phase p) {
  switch (p) {
    case Phase::a:
      return 0.0;
    case Phase::b:
      return -120.0;
    case Phase::c:
      return 120.0;
  }
  return 0.0;
}

char phase_letter(Phase p) { return static_cast<char>('a' + static_cast<int>(p)); }

PhasorTriple phase_voltages(double vm) {
  if (!(vm > 0.0)) throw DomainError("phase voltage magnitude must be > 0");
  return {polar_deg(vm, 0.0), polar_deg(vm, -120.0), polar_deg(vm, 120.0)};
}

PhasorTriple net_phase_currents(const PhasePowers& pp, const PhasorTriple& v,
                                Phasor vn) {
  PhasorTriple out;
  for (std::size_t ph = 0; ph < 3; ++ph) {
    const Phasor s_load{pp.p_load[ph] * 1e3, pp.q_load[ph] * 1e3};
    const Phasor s_pv{pp.p_pv[ph] * 1e3, pp.q_pv[ph] * 1e3};
    const Phasor denom = std::conj(v[ph]) - std::conj(vn);
    if (std::abs(denom) == 0.0) {
      throw DomainError("phase voltage equals neutral voltage");
    }
    out[ph] = (std::conj(s_load) - std::conj(s_pv)) / denom;
  }
  return out;
}

Phasor neutral_current(const PhasorTriple& i_net) {
  return -(i_net[0] + i_net[1] + i_net[2]);
}

SequenceComponents symmetrical_components(const PhasorTriple& i) {
  return {(i[0] + kA * i[1] + kA2 * i[2]) / 3.0,
          (i[0] + kA2 * i[1] + kA * i[2]) / 3.0,
          (i[0] + i[1] + i[2]) / 3.0};
}

PhasorTriple from_symmetrical_components(const SequenceComponents& s) {
  return {s.zero + s.positive + s.negative,
          s.zero + kA2 * s.positive + kA * s.negative,
          s.zero + kA * s.positive + kA2 * s.negative};
}

double cuf(const PhasorTriple& i_abc) {
  const auto seq = symmetrical_components(i_abc);
  const double ps = std::abs(seq.positive);
  if (ps < kCufFloor) {
    throw DomainError("CUF undefined: positive-sequence current is zero");
  }
  return std::hypot(std::abs(seq.negative), std::abs(seq.zero)) / ps * 100.0;
}

Phasor ngv_proxy(Phasor i_neutral, Phasor z_neutral) {
  return z_neutral * i_neutral;
}

UnbalanceMetrics unbalance_metrics(const PhasePowers& pp, double vm,
                                   Phasor z_neutral) {
  UnbalanceMetrics m;
  m.i_phase = net_phase_currents(pp, phase_voltages(vm), Phasor{});
  m.i_neutral = neutral_current(m.i_phase);
  if (std::abs(symmetrical_components(m.i_phase).positive) >= kCufFloor) {
    m.cuf_percent = cuf(m.i_phase);
  }
  m.ngv = ngv_proxy(m.i_neutral, z_neutral);
  return m;
}

}  // namespace lvbal
