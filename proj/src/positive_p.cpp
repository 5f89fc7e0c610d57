#include "nopo/positive_p.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <omp.h>

#include "nopo/errors.hpp"
#include "nopo/philox.hpp"

namespace nopo {

namespace {

// Principal branch, written out: libstdc++ routes std::sqrt(complex) through
// csqrt, which dominated the step cost.
cplx principal_sqrt(cplx z)
{
    const double x = z.real();
    const double y = z.imag();
    if (x == 0.0 && y == 0.0) return {0.0, y};
    const double r = std::sqrt(x * x + y * y);
    if (x >= 0.0) {
        const double t = std::sqrt(0.5 * (r + x));
        return {t, y / (2.0 * t)};
    }
    const double t = std::sqrt(0.5 * (r - x));
    return {std::abs(y) / (2.0 * t), std::copysign(t, y)};
}

// Euler-Maruyama update with eps already evaluated at the step start.
TrajectoryState advance(const TrajectoryState& s, const DerivedConstants& dc, double eps, double dt,
                        const NoiseDraws& xi);

// Quantities accumulated per grid point, in this order.
enum Quantity : std::size_t { kN1, kN2, kNPlus, kR, kCrossA, kCrossB, kZ, kNPlusSq, kNPlusR, kResN, kResR, kCount };

struct Sums {
    double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;

    void add(cplx z)
    {
        re += z.real();
        im += z.imag();
        re2 += z.real() * z.real();
        im2 += z.imag() * z.imag();
    }
    void add(const Sums& o)
    {
        re += o.re;
        im += o.im;
        re2 += o.re2;
        im2 += o.im2;
    }
};

struct Accumulator {
    std::vector<std::array<Sums, kCount>> points;
    std::size_t used = 0;
    std::size_t escaped = 0;

    explicit Accumulator(std::size_t n) : points(n) {}
    void add(const Accumulator& o)
    {
        for (std::size_t k = 0; k < points.size(); ++k) {
            for (std::size_t q = 0; q < kCount; ++q) points[k][q].add(o.points[k][q]);
        }
        used += o.used;
        escaped += o.escaped;
    }
};

struct Sample {
    cplx n1, n2, cross_a, cross_b, R;
};

struct Layout {
    double period = 0.0;
    double spacing = 0.0;        // between recorded samples
    double dt = 0.0;
    std::size_t steps_per_sample = 0;
    std::size_t first_sample_step = 0;
    std::size_t n_samples = 0;
    std::vector<double> eps;     // pump rate at each step of one period
};

Layout make_layout(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                   const EnsembleOptions& opts)
{
    if (opts.n_trajectories < 2) throw ValidationError("n_traj must be >= 2");
    if (!(opts.dt > 0.0)) throw ValidationError("dt must be > 0");
    if (opts.samples_per_period < 2) throw ValidationError("samples_per_period must be >= 2");
    if (opts.periods < 1) throw ValidationError("periods must be >= 1");
    if (opts.block_size < 1) throw ValidationError("block_size must be >= 1");
    if (!(opts.transient >= 0.0)) throw ValidationError("transient must be >= 0");
    Layout l;
    l.period = profile.period(params.gamma);
    l.spacing = l.period / static_cast<double>(opts.samples_per_period);
    l.steps_per_sample = static_cast<std::size_t>(std::ceil(l.spacing / opts.dt - 1e-9));
    l.dt = l.spacing / static_cast<double>(l.steps_per_sample);
    const auto transient_periods = static_cast<std::size_t>(std::ceil(opts.transient / l.period - 1e-9));
    l.first_sample_step = transient_periods * opts.samples_per_period * l.steps_per_sample;
    l.n_samples = opts.samples_per_period * opts.periods + 1;
    l.eps.resize(opts.samples_per_period * l.steps_per_sample);
    for (std::size_t j = 0; j < l.eps.size(); ++j) {
        l.eps[j] = epsilon_of_t(profile, dc, static_cast<double>(j) * l.dt);
    }
    return l;
}

double sample_time(const Layout& l, std::size_t k)
{
    return static_cast<double>(l.first_sample_step + k * l.steps_per_sample) * l.dt;
}

// Integrates one trajectory and folds it into `acc` (unless it escaped).
void run_trajectory(std::size_t index, const DerivedConstants& dc, const PumpProfile& profile, const Layout& l,
                    std::uint64_t seed, std::vector<Sample>& samples, Accumulator& acc)
{
    TrajectoryState s;
    std::size_t next = 0;
    std::size_t phase = 0;  // step index within the pump period
    for (std::size_t step = 0;; ++step) {
        if (step == l.first_sample_step + next * l.steps_per_sample) {
            samples[next] = {s.alpha1 * s.beta1, s.alpha2 * s.beta2, s.alpha1 * s.alpha2, s.beta1 * s.beta2,
                             (s.alpha1 - s.beta2) * (s.beta1 - s.alpha2)};
            if (++next == l.n_samples) break;
        }
        s.t = static_cast<double>(step) * l.dt;
        s = advance(s, dc, l.eps[phase], l.dt, normal4(seed, index, step));
        if (++phase == l.eps.size()) phase = 0;
        if (s.escaped) {
            ++acc.escaped;
            return;
        }
    }

    const double lam = dc.lambda;
    const double g = dc.gamma;
    for (std::size_t k = 0; k < l.n_samples; ++k) {
        const Sample& x = samples[k];
        const cplx n_plus = x.n1 + x.n2;
        const cplx Z = (x.n1 - x.n2) * (x.n1 - x.n2) + n_plus;
        auto& p = acc.points[k];
        p[kN1].add(x.n1);
        p[kN2].add(x.n2);
        p[kNPlus].add(n_plus);
        p[kR].add(x.R);
        p[kCrossA].add(x.cross_a);
        p[kCrossB].add(x.cross_b);
        p[kZ].add(Z);
        p[kNPlusSq].add(n_plus * n_plus);
        p[kNPlusR].add(n_plus * x.R);
        if (k == 0 || k + 1 == l.n_samples) continue;
        const double eps = epsilon_of_t(profile, dc, sample_time(l, k));
        const Sample& lo = samples[k - 1];
        const Sample& hi = samples[k + 1];
        const double inv = 1.0 / (2.0 * l.spacing);
        const cplx d_n_plus = ((hi.n1 + hi.n2) - (lo.n1 + lo.n2)) * inv;
        const cplx d_R = (hi.R - lo.R) * inv;
        const cplx rhs_n_plus = (2.0 * eps - 2.0 * g - lam) * n_plus - lam * n_plus * n_plus - 2.0 * eps * x.R + lam * Z;
        const cplx rhs_R = -(2.0 * eps + 2.0 * g + lam) * x.R - lam * n_plus * x.R - 2.0 * eps + lam * Z;
        p[kResN].add(d_n_plus - rhs_n_plus);
        p[kResR].add(d_R - rhs_R);
    }
    ++acc.used;
}

Moment finish(const Sums& s, std::size_t n)
{
    Moment m;
    if (n == 0) return m;
    const double nn = static_cast<double>(n);
    m.mean = {s.re / nn, s.im / nn};
    if (n > 1) {
        const double var_re = std::max(0.0, (s.re2 - s.re * s.re / nn) / (nn - 1.0));
        const double var_im = std::max(0.0, (s.im2 - s.im * s.im / nn) / (nn - 1.0));
        m.se_re = std::sqrt(var_re / nn);
        m.se_im = std::sqrt(var_im / nn);
    }
    return m;
}

EnsembleStats finalize(const Accumulator& acc, const Layout& l, const DerivedConstants& dc, const PumpProfile& profile,
                       const EnsembleOptions& opts)
{
    EnsembleStats st;
    st.n_trajectories = opts.n_trajectories;
    st.n_escaped = acc.escaped;
    st.seed = opts.seed;
    st.dt = l.dt;
    st.transient = static_cast<double>(l.first_sample_step) * l.dt;
    st.rng = Philox4x32::name;
    st.experimental = regime_classify(profile, dc) == Regime::Above;

    const double escaped_fraction = static_cast<double>(acc.escaped) / static_cast<double>(opts.n_trajectories);
    if (escaped_fraction > 0.10) {
        throw SolverError("more than 10% of trajectories escaped; statistics unreliable", escaped_fraction);
    }
    st.escape_warning = escaped_fraction > 0.01;

    std::vector<Moment>* fields[kCount] = {&st.n1,     &st.n2, &st.n_plus,    &st.R,          &st.cross_alpha,    &st.cross_beta,
                                           &st.Z,      &st.n_plus_sq, &st.n_plus_R, &st.residual_n_plus, &st.residual_R};
    for (auto* f : fields) f->resize(l.n_samples);
    st.t.resize(l.n_samples);
    st.V.resize(l.n_samples);
    st.se_V.resize(l.n_samples);
    for (std::size_t k = 0; k < l.n_samples; ++k) {
        st.t[k] = sample_time(l, k);
        for (std::size_t q = 0; q < kCount; ++q) (*fields[q])[k] = finish(acc.points[k][q], acc.used);
        st.V[k] = 1.0 + st.R[k].mean.real();
        st.se_V[k] = st.R[k].se_re;
    }
    return st;
}

}  // namespace

NoisePair noise_factorize(double eps, double lambda, cplx prod)
{
    const cplx c = principal_sqrt((cplx(eps) - lambda * prod) / 2.0);
    return {c, c};
}

double escape_bound(const DerivedConstants& dc) { return 1e6 * std::max(1.0, std::sqrt(dc.gamma / dc.lambda)); }

TrajectoryState sde_step(const TrajectoryState& s, const DerivedConstants& dc, const PumpProfile& profile, double dt,
                         const NoiseDraws& xi)
{
    if (s.escaped) return s;
    return advance(s, dc, epsilon_of_t(profile, dc, s.t), dt, xi);
}

namespace {

TrajectoryState advance(const TrajectoryState& s, const DerivedConstants& dc, double eps, double dt,
                        const NoiseDraws& xi)
{
    const double g = dc.gamma;
    const double lam = dc.lambda;
    const double sq = std::sqrt(dt);
    const NoisePair na = noise_factorize(eps, lam, s.alpha1 * s.alpha2);
    const NoisePair nb = noise_factorize(eps, lam, s.beta1 * s.beta2);
    const cplx ua(xi[0], xi[1]);
    const cplx ub(xi[2], xi[3]);
    const cplx loss1 = g + lam * s.alpha2 * s.beta2;  // damping of mode 1
    const cplx loss2 = g + lam * s.alpha1 * s.beta1;  // damping of mode 2

    TrajectoryState out;
    out.t = s.t + dt;
    out.alpha1 = s.alpha1 + (-loss1 * s.alpha1 + eps * s.beta2) * dt + na.c1 * ua * sq;
    out.alpha2 = s.alpha2 + (-loss2 * s.alpha2 + eps * s.beta1) * dt + na.c2 * std::conj(ua) * sq;
    out.beta1 = s.beta1 + (-loss1 * s.beta1 + eps * s.alpha2) * dt + nb.c1 * ub * sq;
    out.beta2 = s.beta2 + (-loss2 * s.beta2 + eps * s.alpha1) * dt + nb.c2 * std::conj(ub) * sq;

    const double bound = escape_bound(dc);
    for (const cplx& z : {out.alpha1, out.alpha2, out.beta1, out.beta2}) {
        // norm() is NaN for non-finite input, which fails the comparison.
        if (!(std::norm(z) <= bound * bound)) {
            TrajectoryState frozen = s;
            frozen.escaped = true;
            return frozen;
        }
    }
    return out;
}

}  // namespace

EnsembleStats ensemble_run(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                           const EnsembleOptions& opts)
{
    const Layout l = make_layout(params, dc, profile, opts);
    const std::size_t n = opts.n_trajectories;
    const std::size_t n_blocks = (n + opts.block_size - 1) / opts.block_size;
    std::vector<Accumulator> blocks(n_blocks, Accumulator(l.n_samples));
    const int workers = opts.workers > 0 ? opts.workers : omp_get_max_threads();

#pragma omp parallel num_threads(workers)
    {
        std::vector<Sample> samples(l.n_samples);
#pragma omp for schedule(dynamic, 1)
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const std::size_t end = std::min(n, (b + 1) * opts.block_size);
            for (std::size_t i = b * opts.block_size; i < end; ++i) {
                run_trajectory(i, dc, profile, l, opts.seed, samples, blocks[b]);
            }
        }
    }

    Accumulator total(l.n_samples);
    for (const auto& b : blocks) total.add(b);
    return finalize(total, l, dc, profile, opts);
}

EnsembleStats ensemble_run_serial(const SystemParams& params, const DerivedConstants& dc, const PumpProfile& profile,
                                  const EnsembleOptions& opts)
{
    const Layout l = make_layout(params, dc, profile, opts);
    Accumulator total(l.n_samples);
    std::vector<Sample> samples(l.n_samples);
    for (std::size_t i = 0; i < opts.n_trajectories; ++i) run_trajectory(i, dc, profile, l, opts.seed, samples, total);
    return finalize(total, l, dc, profile, opts);
}

std::vector<double> variance_at_theta(const EnsembleStats& stats, double theta)
{
    const cplx phase = std::polar(1.0, theta);
    std::vector<double> out(stats.t.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = 1.0 + (stats.n_plus[k].mean - stats.cross_alpha[k].mean * phase -
                        stats.cross_beta[k].mean * std::conj(phase))
                           .real();
    }
    return out;
}

ResidualReport moment_residual_check(const SystemParams& params, const DerivedConstants&, const PumpProfile& profile,
                                     const EnsembleStats& stats)
{
    if (stats.t.size() < 3) throw ValidationError("need at least 3 samples for finite differences");
    const double spacing = stats.t[1] - stats.t[0];
    const double per_period = profile.period(params.gamma) / spacing;
    if (per_period < 16.0 - 1e-9) throw ValidationError("grid too coarse for finite differencing (< 16 points per period)");

    auto score = [](const Moment& m) {
        const double r = m.mean.real();
        if (m.se_re > 0.0) return r / m.se_re;
        return r == 0.0 ? 0.0 : std::copysign(HUGE_VAL, r);
    };

    ResidualReport rep;
    std::size_t ok_n = 0, ok_r = 0;
    for (std::size_t k = 1; k + 1 < stats.t.size(); ++k) {
        rep.t.push_back(stats.t[k]);
        rep.z_n_plus.push_back(score(stats.residual_n_plus[k]));
        rep.z_R.push_back(score(stats.residual_R[k]));
        ok_n += std::abs(rep.z_n_plus.back()) <= 3.0;
        ok_r += std::abs(rep.z_R.back()) <= 3.0;
    }
    const double m = static_cast<double>(rep.t.size());
    rep.fraction_within_n_plus = static_cast<double>(ok_n) / m;
    rep.fraction_within_R = static_cast<double>(ok_r) / m;
    rep.passed = rep.fraction_within_n_plus >= 0.95 && rep.fraction_within_R >= 0.95;
    return rep;
}

}  // namespace nopo
