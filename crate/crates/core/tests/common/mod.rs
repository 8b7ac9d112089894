//! Independent reference models shared by the integration tests.
#![allow(dead_code)]

use cavswap::multipartite::NetworkSetup;
use cavswap::{PulsePolicy, SystemParams};
use num_complex::Complex64;

pub type M8 = [[Complex64; 8]; 8];

const Z: Complex64 = Complex64::new(0.0, 0.0);

/// Atom {u, e, g, x} ⊗ cavity {0, 1}; x is the sink of the non-recycling decay.
pub fn idx(atom: usize, photons: usize) -> usize {
    2 * atom + photons
}
pub const U: usize = 0;
pub const E: usize = 1;
pub const G: usize = 2;
pub const X: usize = 3;

fn zero() -> M8 {
    [[Z; 8]; 8]
}

fn mul(a: &M8, b: &M8) -> M8 {
    let mut c = zero();
    for i in 0..8 {
        for k in 0..8 {
            if a[i][k] == Z {
                continue;
            }
            for j in 0..8 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn dagger(a: &M8) -> M8 {
    let mut c = zero();
    for i in 0..8 {
        for j in 0..8 {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

fn axpy(y: &M8, a: f64, x: &M8) -> M8 {
    let mut c = *y;
    for i in 0..8 {
        for j in 0..8 {
            c[i][j] += x[i][j] * a;
        }
    }
    c
}

/// Full two-subsystem Lindblad model integrated with classical RK4.
pub struct FullModel {
    params: SystemParams,
    pulse: PulsePolicy,
    jumps: Vec<M8>,
    lsum: M8,
    annihilate: M8,
}

impl FullModel {
    pub fn new(params: SystemParams, pulse: PulsePolicy) -> Self {
        let mut a = zero();
        for atom in 0..4 {
            a[idx(atom, 0)][idx(atom, 1)] = Complex64::new(1.0, 0.0);
        }
        let mut jumps = Vec::new();
        let scaled = |m: &M8, s: f64| axpy(&zero(), s, m);
        jumps.push(scaled(&a, (2.0 * params.kappa).sqrt()));
        for (target, rate) in [(U, params.gamma_u), (X, params.gamma_g)] {
            let mut l = zero();
            for n in 0..2 {
                l[idx(target, n)][idx(E, n)] = Complex64::new((2.0 * rate).sqrt(), 0.0);
            }
            jumps.push(l);
        }
        let mut lsum = zero();
        for l in &jumps {
            lsum = axpy(&lsum, 1.0, &mul(&dagger(l), l));
        }
        Self {
            params,
            pulse,
            jumps,
            lsum,
            annihilate: a,
        }
    }

    pub fn hamiltonian(&self, t: f64) -> M8 {
        let p = &self.params;
        let om = self.pulse.eval(t);
        let mut h = zero();
        for n in 0..2 {
            h[idx(U, n)][idx(U, n)] = Complex64::new(p.delta_u, 0.0);
            h[idx(E, n)][idx(E, n)] = Complex64::new(p.delta_e, 0.0);
            h[idx(U, n)][idx(E, n)] = om;
            h[idx(E, n)][idx(U, n)] = om.conj();
        }
        h[idx(G, 1)][idx(E, 0)] = Complex64::new(p.g, 0.0);
        h[idx(E, 0)][idx(G, 1)] = Complex64::new(p.g, 0.0);
        h
    }

    /// Lindblad generator applied to an arbitrary operator.
    pub fn generator(&self, t: f64, x: &M8) -> M8 {
        let h = self.hamiltonian(t);
        let mi = Complex64::new(0.0, -1.0);
        let hx = mul(&h, x);
        let xh = mul(x, &h);
        let lx = mul(&self.lsum, x);
        let xl = mul(x, &self.lsum);
        let mut out = zero();
        for i in 0..8 {
            for j in 0..8 {
                out[i][j] = mi * (hx[i][j] - xh[i][j]) - 0.5 * (lx[i][j] + xl[i][j]);
            }
        }
        for l in &self.jumps {
            let lxl = mul(&mul(l, x), &dagger(l));
            out = axpy(&out, 1.0, &lxl);
        }
        out
    }

    pub fn rk4_step(&self, t: f64, dt: f64, x: &M8) -> M8 {
        let k1 = self.generator(t, x);
        let k2 = self.generator(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k1));
        let k3 = self.generator(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k2));
        let k4 = self.generator(t + dt, &axpy(x, dt, &k3));
        let mut out = *x;
        for i in 0..8 {
            for j in 0..8 {
                out[i][j] += (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) * (dt / 6.0);
            }
        }
        out
    }

    pub fn initial_state() -> M8 {
        let mut r = zero();
        r[idx(U, 0)][idx(U, 0)] = Complex64::new(1.0, 0.0);
        r
    }

    /// Propagates `x` from `t0` over `steps` steps of `dt`, calling `visit`
    /// after every `stride` steps.
    pub fn propagate<F: FnMut(usize, &M8)>(&self, t0: f64, dt: f64, steps: usize, stride: usize, x: &M8, mut visit: F) -> M8 {
        let mut x = *x;
        visit(0, &x);
        for s in 0..steps {
            x = self.rk4_step(t0 + s as f64 * dt, dt, &x);
            if (s + 1) % stride == 0 {
                visit((s + 1) / stride, &x);
            }
        }
        x
    }

    /// Population of |g, 0⟩ at `t_end`, which only cavity decay can feed.
    pub fn emission_probability(&self, t_end: f64, dt: f64) -> f64 {
        let steps = (t_end / dt).round() as usize;
        let dt = t_end / steps as f64;
        let rho = self.propagate(0.0, dt, steps, steps, &Self::initial_state(), |_, _| {});
        rho[idx(G, 0)][idx(G, 0)].re
    }

    /// `G(t_i, t_j) = Tr[a e^{L(t_j - t_i)}(ρ(t_i) a†)]` on `points` equally
    /// spaced samples of `[0, t_end]`, `substeps` RK4 steps between samples.
    pub fn correlation(&self, t_end: f64, points: usize, substeps: usize) -> Vec<Vec<Complex64>> {
        let h = t_end / (points - 1) as f64;
        let dt = h / substeps as f64;
        let mut rhos = Vec::with_capacity(points);
        self.propagate(0.0, dt, substeps * (points - 1), substeps, &Self::initial_state(), |_, r| {
            rhos.push(*r)
        });
        let adag = dagger(&self.annihilate);
        let mut g = vec![vec![Z; points]; points];
        for i in 0..points {
            let start = mul(&rhos[i], &adag);
            let steps = substeps * (points - 1 - i);
            self.propagate(i as f64 * h, dt, steps, substeps, &start, |k, x| {
                let ax = mul(&self.annihilate, x);
                g[i][i + k] = (0..8).map(|d| ax[d][d]).sum();
            });
            for j in 0..i {
                g[i][j] = g[j][i].conj();
            }
        }
        g
    }
}

/// Heralded fidelity built directly from time-binned photon amplitudes.
///
/// Every branch combination of the sources that puts exactly one photon per
/// clicked mode contributes `Π branch amplitudes · Σ_σ Π_i U[l_i][in_σ(i)]
/// φ*_σ(i)(t_i)` to the atomic state for click times `(t_1, …, t_L)`. The
/// time-averaged fidelity is `⟨ideal|ρ|ideal⟩ / (⟨ideal|ideal⟩ Tr ρ)` with
/// `ρ = Σ_bins Π w |ψ⟩⟨ψ|`, and the ideal state uses constant waveforms.
pub fn brute_force_fidelity(setup: &NetworkSetup, waveforms: &[Vec<Complex64>], weights: &[f64]) -> f64 {
    let bins = weights.len();
    let clicks = &setup.clicks;
    let l = clicks.len();
    let atoms_dim = 1usize << setup.sources.len();
    let normalized: Vec<Vec<Complex64>> = waveforms
        .iter()
        .map(|w| {
            let n: f64 = w.iter().zip(weights).map(|(z, w)| z.norm_sqr() * w).sum();
            w.iter().map(|z| z / n.sqrt()).collect()
        })
        .collect();

    // (amplitude, atom index, photons as (source, input mode))
    let mut combos: Vec<(Complex64, usize, Vec<(usize, usize)>)> = vec![(Complex64::new(1.0, 0.0), 0, vec![])];
    for (k, s) in setup.sources.iter().enumerate() {
        let mut next = Vec::new();
        for (amp, atoms, photons) in &combos {
            for b in &s.branches {
                let mut p = photons.clone();
                if let Some(m) = b.mode {
                    p.push((k, m));
                }
                next.push((amp * b.amplitude, atoms | (usize::from(b.excited) << k), p));
            }
        }
        combos = next;
    }
    combos.retain(|c| c.2.len() == l);
    let perms = permutations(l);
    let u = &setup.network.matrix;

    let state = |times: &[usize], wave: &dyn Fn(usize, usize) -> Complex64| -> Vec<Complex64> {
        let mut psi = vec![Complex64::new(0.0, 0.0); atoms_dim];
        for (amp, atoms, photons) in &combos {
            let mut sum = Complex64::new(0.0, 0.0);
            for perm in &perms {
                let mut term = Complex64::new(1.0, 0.0);
                for (i, &pi) in perm.iter().enumerate() {
                    let (src, input) = photons[pi];
                    term *= u[clicks[i]][input] * wave(src, times[i]).conj();
                }
                sum += term;
            }
            psi[*atoms] += amp * sum;
        }
        psi
    };

    let ideal = state(&vec![0; l], &|_, _| Complex64::new(1.0, 0.0));
    let ideal_norm: f64 = ideal.iter().map(|z| z.norm_sqr()).sum();
    let mut overlap = 0.0;
    let mut trace = 0.0;
    let mut times = vec![0usize; l];
    loop {
        let w: f64 = times.iter().map(|&b| weights[b]).product();
        let psi = state(&times, &|s, b| normalized[setup.sources[s].waveform][b]);
        let dot: Complex64 = ideal.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
        overlap += w * dot.norm_sqr();
        trace += w * psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let mut d = 0;
        while d < l {
            times[d] += 1;
            if times[d] < bins {
                break;
            }
            times[d] = 0;
            d += 1;
        }
        if d == l {
            break;
        }
    }
    overlap / (ideal_norm * trace)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Gaussian sampled on `times` with a linear phase.
pub fn gaussian(times: &[f64], t0: f64, width: f64, chirp: f64) -> Vec<Complex64> {
    times
        .iter()
        .map(|t| Complex64::from_polar((-(t - t0).powi(2) / (2.0 * width * width)).exp(), chirp * (t - t0)))
        .collect()
}
