use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Kernel, ModelConfig, PriorSpec};
use crate::error::{Error, Result};
use crate::geometry::RegionGeometry;
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;

const JITTER: f64 = 1e-10;

/// Full sampler output for the modelled (non-fixed) lines, burn-in included.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Chains<F> {
    pub burn_in: usize,
    /// Line index of each modelled parameter.
    pub lines: Vec<usize>,
    /// `mu[a][t]` for modelled line `lines[a]`.
    pub mu: Vec<Vec<F>>,
    pub sigma: Vec<Vec<F>>,
    pub kappa: Vec<F>,
    /// Log posterior (up to a constant) after each iteration.
    pub log_target: Vec<f64>,
}

impl<F: Scalar> Chains<F> {
    pub fn iterations(&self) -> usize {
        self.kappa.len()
    }

    /// Post burn-in mean and standard deviation of one chain.
    pub fn moments(chain: &[F], burn_in: usize) -> (F, F) {
        let mut acc = Moments::default();
        chain.iter().skip(burn_in).for_each(|v| acc.push(v.as_f64()));
        (F::lit(acc.mean()), F::lit(acc.sd()))
    }
}

/// Running sums, fed in chain order so stored and imported chains agree
/// bit for bit.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sumsq += v * v;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    fn sd(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let m = self.mean();
        ((self.sumsq - self.n as f64 * m * m) / (self.n - 1) as f64).max(0.0).sqrt()
    }
}

/// Fitted contour distribution for one region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourPosterior<F> {
    pub region: u32,
    pub n_lines: usize,
    pub kernel: Kernel<F>,
    /// Fixed value per line; `None` for modelled lines.
    pub fixed: Vec<Option<bool>>,
    /// Modelled line indices, in order.
    pub free: Vec<usize>,
    pub mu_mean: Vec<F>,
    pub sigma_mean: Vec<F>,
    pub kappa_mean: F,
    pub mu_sd: Vec<F>,
    pub sigma_sd: Vec<F>,
    pub kappa_sd: F,
    /// Post burn-in acceptance rates.
    pub acceptance_mu: Vec<f64>,
    pub acceptance_sigma: Vec<f64>,
    pub acceptance_kappa: f64,
    pub config: ModelConfig,
    pub seed: u64,
    #[serde(skip)]
    pub chains: Option<Chains<F>>,
}

impl<F: Scalar> ContourPosterior<F> {
    /// A posterior with every line fixed; generation is deterministic.
    pub fn constant(region: u32, kernel: Kernel<F>, fixed: Vec<Option<bool>>, config: ModelConfig, seed: u64) -> Self {
        ContourPosterior {
            region,
            n_lines: fixed.len(),
            kernel,
            fixed,
            free: Vec::new(),
            mu_mean: Vec::new(),
            sigma_mean: Vec::new(),
            kappa_mean: F::one(),
            mu_sd: Vec::new(),
            sigma_sd: Vec::new(),
            kappa_sd: F::zero(),
            acceptance_mu: Vec::new(),
            acceptance_sigma: Vec::new(),
            acceptance_kappa: 0.0,
            config,
            seed,
            chains: None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.free.is_empty()
    }

    /// Recomputes means and standard deviations from `chains`.
    pub fn summarize(&mut self) {
        let Some(ch) = &self.chains else { return };
        let b = ch.burn_in;
        let (mm, ms): (Vec<F>, Vec<F>) = ch.mu.iter().map(|c| Chains::moments(c, b)).unzip();
        let (sm, ss): (Vec<F>, Vec<F>) = ch.sigma.iter().map(|c| Chains::moments(c, b)).unzip();
        let (km, ks) = Chains::moments(&ch.kappa, b);
        self.mu_mean = mm;
        self.mu_sd = ms;
        self.sigma_mean = sm;
        self.sigma_sd = ss;
        self.kappa_mean = km;
        self.kappa_sd = ks;
    }

    /// Posterior-mean logit proportion per line; `None` for fixed lines.
    pub fn full_mean(&self) -> Vec<Option<F>> {
        let mut out: Vec<Option<F>> = vec![None; self.n_lines];
        for (a, &i) in self.free.iter().enumerate() {
            out[i] = Some(self.mu_mean[a]);
        }
        out
    }
}

struct State<'a, F: Scalar> {
    kernel: &'a Kernel<F>,
    free: &'a [usize],
    region: u32,
    p: F,
    s: Vec<F>,
    xx: Matrix<F>,
    mu0: Vec<F>,
    lam: Vec<F>,
    mu: Vec<F>,
    sigma: Vec<F>,
    kappa: F,
    cinv: Matrix<F>,
    logdet_c: F,
    q: Matrix<F>,
    qs: Vec<F>,
    qmu: Vec<F>,
    smat: Matrix<F>,
    quad: F,
}

impl<F: Scalar> State<'_, F> {
    fn factor(&self, kappa: F) -> Result<(Matrix<F>, F)> {
        let c = self.kernel.correlation(self.free, kappa);
        let ch = Cholesky::with_jitter(&c, F::lit(JITTER)).ok_or_else(|| Error::Fit {
            region: self.region,
            reason: format!("correlation matrix not positive definite at kappa {kappa}"),
        })?;
        Ok((ch.inverse(), ch.log_det()))
    }

    fn refresh_q(&mut self) {
        let m = self.mu.len();
        for a in 0..m {
            for b in 0..m {
                self.q.set(a, b, self.cinv.get(a, b) / (self.sigma[a] * self.sigma[b]));
            }
        }
        self.qs = self.q.mul_vec(&self.s);
        self.qmu = self.q.mul_vec(&self.mu);
    }

    fn refresh_scatter(&mut self) {
        let m = self.mu.len();
        for a in 0..m {
            for b in 0..m {
                let v = self.xx.get(a, b) - self.s[a] * self.mu[b] - self.mu[a] * self.s[b]
                    + self.p * self.mu[a] * self.mu[b];
                self.smat.set(a, b, v);
            }
        }
    }

    fn quad_with(&self, cinv: &Matrix<F>) -> F {
        let m = self.mu.len();
        let mut total = F::zero();
        for a in 0..m {
            let mut row = F::zero();
            for b in 0..m {
                row += cinv.get(a, b) * self.smat.get(a, b) / self.sigma[b];
            }
            total += row / self.sigma[a];
        }
        total
    }

    fn prior_term(&self) -> F {
        self.mu.iter().zip(&self.mu0).zip(&self.lam).map(|((&m, &m0), &l)| (m - m0) * (m - m0) / l).sum::<F>()
            / F::lit(-2.0)
    }

    fn log_target(&self) -> F {
        let half = F::lit(0.5);
        -self.p * self.sigma.iter().map(|s| s.ln()).sum::<F>() - half * self.p * self.logdet_c - half * self.quad
            + self.prior_term()
    }
}

/// Proposal scale with Robbins-Monro adaptation during burn-in.
struct Proposal {
    log_scale: f64,
    accepted: usize,
    tried: usize,
}

impl Proposal {
    fn new(scale: f64) -> Self {
        Proposal { log_scale: scale.max(1e-8).ln(), accepted: 0, tried: 0 }
    }

    fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    fn record(&mut self, accepted: bool, t: usize, burn_in: usize, target: f64) {
        if t < burn_in {
            let gain = ((t + 1) as f64).powf(-0.6);
            self.log_scale += gain * (f64::from(u8::from(accepted)) - target);
        } else {
            self.tried += 1;
            self.accepted += usize::from(accepted);
        }
    }

    fn rate(&self) -> f64 {
        if self.tried == 0 {
            0.0
        } else {
            self.accepted as f64 / self.tried as f64
        }
    }
}

fn accept<R: Rng>(rng: &mut R, log_ratio: f64) -> bool {
    if !log_ratio.is_finite() {
        return false;
    }
    log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio
}

/// Samples the posterior of `(mu, sigma, kappa)` given logit proportions
/// `tilde[j][i]` for `P` training years.
///
/// Lines with `fixed[i]` set are left out of the parameter vector. Each
/// iteration updates every `mu_i`, then every `sigma_i`, then `kappa`, each
/// with a normal random-walk proposal; out-of-support proposals are
/// rejected. Deterministic for a given `seed`.
pub fn fit_posterior<F: Scalar>(
    tilde: &[Vec<F>],
    fixed: &[Option<bool>],
    prior: &PriorSpec<F>,
    geom: &RegionGeometry<F>,
    cfg: &ModelConfig,
    seed: u64,
) -> Result<ContourPosterior<F>> {
    cfg.validate()?;
    let region = geom.region;
    let n = geom.n_lines();
    let fit_err = |reason: String| Error::Fit { region, reason };
    if tilde.len() < 2 {
        return Err(fit_err(format!("need at least two training years, got {}", tilde.len())));
    }
    if tilde.iter().any(|r| r.len() != n) || fixed.len() != n || prior.n_lines() != n {
        return Err(Error::structural(format!("inputs disagree with the geometry's {n} lines")));
    }
    let kernel = Kernel::for_geometry(geom);
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    if free.is_empty() {
        return Ok(ContourPosterior::constant(region, kernel, fixed.to_vec(), cfg.clone(), seed));
    }
    for (j, row) in tilde.iter().enumerate() {
        if let Some(&i) = free.iter().find(|&&i| !row[i].is_finite()) {
            return Err(fit_err(format!("training year {j}, line {i}: non-finite logit proportion")));
        }
    }
    for &i in &free {
        if !(prior.lambda0[i] > F::zero()) || !prior.mu0[i].is_finite() {
            return Err(fit_err(format!("line {i}: prior variance must be positive")));
        }
    }
    let (sig_lo, sig_hi) = prior.sigma_bounds;
    let (kap_lo, kap_hi) = prior.kappa_bounds;
    if !(sig_lo > F::zero() && sig_lo < sig_hi && kap_lo > F::zero() && kap_lo < kap_hi) {
        return Err(fit_err("empty or nonpositive uniform prior support".into()));
    }

    let m = free.len();
    let p = F::from_usize_lossy(tilde.len());
    let x: Vec<Vec<F>> = tilde.iter().map(|r| free.iter().map(|&i| r[i]).collect()).collect();
    let s: Vec<F> = (0..m).map(|a| x.iter().map(|r| r[a]).sum()).collect();
    let xx = Matrix::from_fn(m, |a, b| x.iter().map(|r| r[a] * r[b]).sum());
    let mu0: Vec<F> = free.iter().map(|&i| prior.mu0[i]).collect();
    let lam: Vec<F> = free.iter().map(|&i| prior.lambda0[i]).collect();

    // start near the independent-lines conjugate posterior
    let inside = |v: F, lo: F, hi: F| v.max(lo + (hi - lo) * F::lit(1e-3)).min(hi - (hi - lo) * F::lit(1e-3));
    let mut sigma = Vec::with_capacity(m);
    let mut mu = Vec::with_capacity(m);
    for a in 0..m {
        let mean = s[a] / p;
        let var = x.iter().map(|r| (r[a] - mean) * (r[a] - mean)).sum::<F>() / (p - F::one());
        let sd = inside(var.sqrt(), sig_lo, sig_hi);
        let data_prec = p / (sd * sd);
        let prior_prec = F::one() / lam[a];
        mu.push((data_prec * mean + prior_prec * mu0[a]) / (data_prec + prior_prec));
        sigma.push(sd);
    }
    let kappa = inside(F::one(), kap_lo, kap_hi);

    let mut st = State {
        kernel: &kernel,
        free: &free,
        region,
        p,
        s,
        xx,
        mu0,
        lam,
        mu,
        sigma,
        kappa,
        cinv: Matrix::zeros(m),
        logdet_c: F::zero(),
        q: Matrix::zeros(m),
        qs: Vec::new(),
        qmu: Vec::new(),
        smat: Matrix::zeros(m),
        quad: F::zero(),
    };
    let (cinv, logdet) = st.factor(kappa)?;
    st.cinv = cinv;
    st.logdet_c = logdet;
    st.refresh_q();
    st.refresh_scatter();
    st.quad = st.quad_with(&st.cinv);

    let mut prop_mu: Vec<Proposal> =
        (0..m).map(|a| Proposal::new(0.5 * (st.lam[a].min(st.sigma[a] * st.sigma[a] / p)).sqrt().as_f64())).collect();
    let mut prop_sigma: Vec<Proposal> = (0..m).map(|a| Proposal::new(0.2 * st.sigma[a].as_f64())).collect();
    let mut prop_kappa = Proposal::new(0.5);

    let iters = cfg.iterations;
    let burn_in = cfg.burn_in;
    let target = cfg.target_acceptance;
    let mut chains = Chains {
        burn_in,
        lines: free.clone(),
        mu: vec![Vec::new(); m],
        sigma: vec![Vec::new(); m],
        kappa: Vec::new(),
        log_target: Vec::new(),
    };
    if cfg.store_chains {
        chains.mu.iter_mut().chain(chains.sigma.iter_mut()).for_each(|c| c.reserve_exact(iters));
        chains.kappa.reserve_exact(iters);
        chains.log_target.reserve_exact(iters);
    }
    let mut mom_mu = vec![Moments::default(); m];
    let mut mom_sigma = vec![Moments::default(); m];
    let mut mom_kappa = Moments::default();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = F::lit(0.5);
    for t in 0..iters {
        // mu_i: likelihood change from the cached Q s and Q mu
        for a in 0..m {
            let z: f64 = rng.sample(StandardNormal);
            let delta = F::lit(z * prop_mu[a].scale());
            let cur = st.mu[a] - st.mu0[a];
            let new = cur + delta;
            let d_like = delta * st.qs[a] - half * st.p * (F::lit(2.0) * delta * st.qmu[a] + delta * delta * st.q.get(a, a));
            let d_prior = -half * (new * new - cur * cur) / st.lam[a];
            let ok = accept(&mut rng, (d_like + d_prior).as_f64());
            if ok {
                st.mu[a] += delta;
                for b in 0..m {
                    let qba = st.q.get(b, a);
                    st.qmu[b] += delta * qba;
                }
            }
            prop_mu[a].record(ok, t, burn_in, target);
        }
        st.refresh_scatter();
        st.quad = st.quad_with(&st.cinv);

        // sigma_i: only row and column i of the quadratic form change
        for a in 0..m {
            let z: f64 = rng.sample(StandardNormal);
            let old = st.sigma[a];
            let new = old + F::lit(z * prop_sigma[a].scale());
            let mut ok = false;
            if new > sig_lo && new < sig_hi {
                let (ri, rn) = (F::one() / old, F::one() / new);
                let mut cross = F::zero();
                for b in 0..m {
                    if b != a {
                        cross += st.cinv.get(a, b) * st.smat.get(a, b) / st.sigma[b];
                    }
                }
                let diag = st.cinv.get(a, a) * st.smat.get(a, a);
                let d_quad = F::lit(2.0) * cross * (rn - ri) + diag * (rn * rn - ri * ri);
                let d = -st.p * (new.ln() - old.ln()) - half * d_quad;
                ok = accept(&mut rng, d.as_f64());
                if ok {
                    st.sigma[a] = new;
                    st.quad += d_quad;
                }
            }
            prop_sigma[a].record(ok, t, burn_in, target);
        }

        // kappa: refactor the correlation matrix
        {
            let z: f64 = rng.sample(StandardNormal);
            let new = st.kappa + F::lit(z * prop_kappa.scale());
            let mut ok = false;
            if new > kap_lo && new < kap_hi {
                let (cinv, logdet) = st.factor(new)?;
                let quad = st.quad_with(&cinv);
                let d = -half * st.p * (logdet - st.logdet_c) - half * (quad - st.quad);
                ok = accept(&mut rng, d.as_f64());
                if ok {
                    st.kappa = new;
                    st.cinv = cinv;
                    st.logdet_c = logdet;
                    st.quad = quad;
                }
            }
            prop_kappa.record(ok, t, burn_in, target);
        }
        st.refresh_q();

        let lt = st.log_target().as_f64();
        if !lt.is_finite() {
            return Err(fit_err(format!("log posterior became non-finite at iteration {t}")));
        }
        if cfg.store_chains {
            for a in 0..m {
                chains.mu[a].push(st.mu[a]);
                chains.sigma[a].push(st.sigma[a]);
            }
            chains.kappa.push(st.kappa);
            chains.log_target.push(lt);
        }
        if t >= burn_in {
            for a in 0..m {
                mom_mu[a].push(st.mu[a].as_f64());
                mom_sigma[a].push(st.sigma[a].as_f64());
            }
            mom_kappa.push(st.kappa.as_f64());
        }
    }

    let lit = |v: f64| F::lit(v);
    Ok(ContourPosterior {
        region,
        n_lines: n,
        kernel: kernel.clone(),
        fixed: fixed.to_vec(),
        free: free.clone(),
        mu_mean: mom_mu.iter().map(|x| lit(x.mean())).collect(),
        sigma_mean: mom_sigma.iter().map(|x| lit(x.mean())).collect(),
        kappa_mean: lit(mom_kappa.mean()),
        mu_sd: mom_mu.iter().map(|x| lit(x.sd())).collect(),
        sigma_sd: mom_sigma.iter().map(|x| lit(x.sd())).collect(),
        kappa_sd: lit(mom_kappa.sd()),
        acceptance_mu: prop_mu.iter().map(Proposal::rate).collect(),
        acceptance_sigma: prop_sigma.iter().map(Proposal::rate).collect(),
        acceptance_kappa: prop_kappa.rate(),
        config: cfg.clone(),
        seed,
        chains: cfg.store_chains.then_some(chains),
    })
}
