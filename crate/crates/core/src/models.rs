//! The twelve concrete Hamiltonians, their model-specific integrals and the
//! decomposition or functional identities each one satisfies.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::dunkl::{hbar_sq, ih, CasimirExprs, Dunkl, DunklError, SiteConfig};
use crate::opalg::{Algebra, Expr, NormalOp};
use crate::ring::{Atom, FieldElem, GaussRat, Param, ParamScalar, Ring, RingError, MAX_DIMS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Osc,
    SW,
    Higgs,
    CurvedSW,
    DarbouxIII,
    GenDarbouxIII,
    KC,
    QGenKC,
    CurvedKC,
    QGenCurvedKC,
    TaubNUT,
    QGenTaubNUT,
}

/// Which centrifugal terms `beta_i + gamma_i R_i` a model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centrifugal {
    None,
    All,
    AllButLast,
}

impl ModelKind {
    pub const ALL: [ModelKind; 12] = [
        ModelKind::Osc,
        ModelKind::SW,
        ModelKind::Higgs,
        ModelKind::CurvedSW,
        ModelKind::DarbouxIII,
        ModelKind::GenDarbouxIII,
        ModelKind::KC,
        ModelKind::QGenKC,
        ModelKind::CurvedKC,
        ModelKind::QGenCurvedKC,
        ModelKind::TaubNUT,
        ModelKind::QGenTaubNUT,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Osc => "osc",
            ModelKind::SW => "sw",
            ModelKind::Higgs => "higgs",
            ModelKind::CurvedSW => "curvedsw",
            ModelKind::DarbouxIII => "darboux3",
            ModelKind::GenDarbouxIII => "gendarboux3",
            ModelKind::KC => "kc",
            ModelKind::QGenKC => "qgenkc",
            ModelKind::CurvedKC => "curvedkc",
            ModelKind::QGenCurvedKC => "qgencurvedkc",
            ModelKind::TaubNUT => "taubnut",
            ModelKind::QGenTaubNUT => "qgentaubnut",
        }
    }

    pub fn is_kc_family(self) -> bool {
        matches!(
            self,
            ModelKind::KC
                | ModelKind::QGenKC
                | ModelKind::CurvedKC
                | ModelKind::QGenCurvedKC
                | ModelKind::TaubNUT
                | ModelKind::QGenTaubNUT
        )
    }

    pub fn centrifugal(self) -> Centrifugal {
        match self {
            ModelKind::SW | ModelKind::CurvedSW | ModelKind::GenDarbouxIII => Centrifugal::All,
            ModelKind::QGenKC | ModelKind::QGenCurvedKC | ModelKind::QGenTaubNUT => Centrifugal::AllButLast,
            _ => Centrifugal::None,
        }
    }

    fn curved(self) -> bool {
        matches!(self, ModelKind::Higgs | ModelKind::CurvedSW | ModelKind::CurvedKC | ModelKind::QGenCurvedKC)
    }

    fn darboux(self) -> bool {
        matches!(self, ModelKind::DarbouxIII | ModelKind::GenDarbouxIII)
    }

    fn taub_nut(self) -> bool {
        matches!(self, ModelKind::TaubNUT | ModelKind::QGenTaubNUT)
    }

    /// The deformation parameter of the model, if any.
    pub fn deformation(self) -> Option<Param> {
        if self.curved() {
            Some(Param::Kappa)
        } else if self.darboux() {
            Some(Param::Lambda)
        } else if self.taub_nut() {
            Some(Param::Eta)
        } else {
            None
        }
    }

    /// Model reached when the deformation parameter is sent to zero.
    pub fn flat_limit(self) -> Option<ModelKind> {
        Some(match self {
            ModelKind::Higgs => ModelKind::Osc,
            ModelKind::CurvedSW => ModelKind::SW,
            ModelKind::DarbouxIII => ModelKind::Osc,
            ModelKind::GenDarbouxIII => ModelKind::SW,
            ModelKind::CurvedKC => ModelKind::KC,
            ModelKind::QGenCurvedKC => ModelKind::QGenKC,
            ModelKind::TaubNUT => ModelKind::KC,
            ModelKind::QGenTaubNUT => ModelKind::QGenKC,
            _ => return None,
        })
    }

    pub fn min_dims(self) -> usize {
        if self.is_kc_family() {
            2
        } else {
            1
        }
    }

    /// Number of model-specific integrals at dimension `n`.
    pub fn extra_count(self, n: usize) -> usize {
        match self {
            ModelKind::Osc | ModelKind::DarbouxIII => n * (n + 1) / 2,
            ModelKind::QGenKC | ModelKind::QGenCurvedKC | ModelKind::QGenTaubNUT => 1,
            _ => n,
        }
    }

    fn hamiltonian_form(self) -> &'static str {
        match self {
            ModelKind::Osc => "H = pi^2/2 + omega^2 x^2/2",
            ModelKind::SW => "H = J+/2 + omega^2 x^2/2, all centrifugal terms",
            ModelKind::Higgs => "H = (1+kappa x^2)^2 pi^2/2 + omega^2 x^2/(2 (1-kappa x^2)^2)",
            ModelKind::CurvedSW => "H = (1+kappa x^2)^2 J+/2 + omega^2 x^2/(2 (1-kappa x^2)^2)",
            ModelKind::DarbouxIII => "H = (pi^2 + omega^2 x^2)/(2 (1+lambda x^2))",
            ModelKind::GenDarbouxIII => "H = (J+ + omega^2 x^2)/(2 (1+lambda x^2))",
            ModelKind::KC => "H = pi^2/2 - k/|x|",
            ModelKind::QGenKC => "H = J+/2 - k/|x|, beta_N = gamma_N = 0",
            ModelKind::CurvedKC => "H = (1+kappa x^2)^2 pi^2/2 - k (1-kappa x^2)/|x|",
            ModelKind::QGenCurvedKC => "H = (1+kappa x^2)^2 J+/2 - k (1-kappa x^2)/|x|, beta_N = gamma_N = 0",
            ModelKind::TaubNUT => "H = |x|/(eta+|x|) pi^2/2 - k/(eta+|x|)",
            ModelKind::QGenTaubNUT => "H = |x|/(eta+|x|) J+/2 - k/(eta+|x|), beta_N = gamma_N = 0",
        }
    }

    fn extra_form(self) -> &'static str {
        match self {
            ModelKind::Osc => "F_ij = pi_i pi_j + omega^2 x_i x_j",
            ModelKind::SW => "F_i = pi_i^2 + (beta_i + gamma_i R_i)/x_i^2 + omega^2 x_i^2",
            ModelKind::Higgs => "I_i from the curved momenta Gamma_i",
            ModelKind::CurvedSW => "J_i = I_i + (1-kappa x^2)^2 (beta_i + gamma_i R_i)/(2 x_i^2)",
            ModelKind::DarbouxIII => "F_ij = pi_i pi_j + x_i x_j (omega^2 - 2 lambda H)",
            ModelKind::GenDarbouxIII => "F_i = pi_i^2 + (beta_i + gamma_i R_i)/x_i^2 + x_i^2 (omega^2 - 2 lambda H)",
            ModelKind::KC => "A_i, Dunkl Laplace-Runge-Lenz vector",
            ModelKind::QGenKC => "A_N with centrifugal corrections",
            ModelKind::CurvedKC => "A_i built from the curved momenta",
            ModelKind::QGenCurvedKC => "A_N built from the curved momenta",
            ModelKind::TaubNUT => "A_i with k replaced by k + eta H",
            ModelKind::QGenTaubNUT => "A_N with k replaced by k + eta H",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model '{0}'")]
    Unknown(String),
    #[error("KC-family requires N ≥ 2")]
    KcNeedsTwoDims,
    #[error("N = {0} is outside 1..={max}", max = MAX_DIMS)]
    Dims(usize),
    #[error(transparent)]
    Dunkl(#[from] DunklError),
}

impl From<RingError> for ModelError {
    fn from(e: RingError) -> Self {
        ModelError::Dunkl(e.into())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        ModelKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s || format!("{k:?}").to_ascii_lowercase() == s)
            .ok_or(ModelError::Unknown(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub dims: usize,
    pub config: SiteConfig,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, dims: usize) -> Result<ModelSpec, ModelError> {
        if kind.is_kc_family() && dims < 2 {
            return Err(ModelError::KcNeedsTwoDims);
        }
        if dims == 0 || dims > MAX_DIMS {
            return Err(ModelError::Dims(dims));
        }
        let mut config = SiteConfig::new(dims);
        config.radial = kind.is_kc_family();
        match kind.centrifugal() {
            Centrifugal::None => {}
            Centrifugal::All => config = config.with_centrifugal(),
            Centrifugal::AllButLast => {
                config = config.with_centrifugal();
                config.beta[dims - 1] = false;
                config.gamma[dims - 1] = false;
            }
        }
        config.kappa = kind.curved();
        config.lambda = kind.darboux();
        config.eta = kind.taub_nut();
        Ok(ModelSpec { kind, dims, config })
    }
}

/// Static description of one model.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ModelInfo {
    pub name: &'static str,
    pub kind: String,
    pub min_dims: usize,
    pub needs_radial: bool,
    pub centrifugal: &'static str,
    pub deformation: Option<String>,
    pub flat_limit: Option<&'static str>,
    /// Per-model integrals as a function of N.
    pub extra_integrals: &'static str,
    pub hamiltonian: &'static str,
    pub integrals: &'static str,
}

pub fn catalog() -> Vec<ModelInfo> {
    ModelKind::ALL
        .iter()
        .map(|&k| ModelInfo {
            name: k.name(),
            kind: format!("{k:?}"),
            min_dims: k.min_dims(),
            needs_radial: k.is_kc_family(),
            centrifugal: match k.centrifugal() {
                Centrifugal::None => "none",
                Centrifugal::All => "all",
                Centrifugal::AllButLast => "beta_N = gamma_N = 0",
            },
            deformation: k.deformation().map(|p| p.name()),
            flat_limit: k.flat_limit().map(|m| m.name()),
            extra_integrals: match k.extra_count(3) {
                6 => "N(N+1)/2",
                1 => "1",
                _ => "N",
            },
            hamiltonian: k.hamiltonian_form(),
            integrals: k.extra_form(),
        })
        .collect()
}

/// A named identity `lhs = rhs`.
#[derive(Clone)]
pub struct NamedIdentity {
    pub label: String,
    pub reference: String,
    pub lhs: Expr,
    pub rhs: Expr,
}

/// A model instantiated over one ring.
pub struct Model {
    pub spec: ModelSpec,
    pub dunkl: Dunkl,
    pub hamiltonian: Expr,
}

fn half() -> GaussRat {
    GaussRat::frac(1, 2)
}

impl Model {
    pub fn symbolic(spec: ModelSpec) -> Result<Model, ModelError> {
        Model::new(spec, spec.config.ring()?)
    }

    /// Builds the model over `ring`, which fixes any parameter values.
    pub fn new(spec: ModelSpec, ring: Ring) -> Result<Model, ModelError> {
        Model::with_algebra(spec, Arc::new(Algebra::new(ring)))
    }

    pub fn with_algebra(spec: ModelSpec, alg: Arc<Algebra>) -> Result<Model, ModelError> {
        let dunkl = Dunkl::new(spec.config, alg)?;
        let hamiltonian = build_hamiltonian_expr(spec.kind, &dunkl)?;
        Ok(Model { spec, dunkl, hamiltonian })
    }

    pub fn ring(&self) -> &Ring {
        self.dunkl.ring()
    }

    fn fe(&self) -> Fe<'_> {
        Fe(self.ring())
    }

    /// The `2N-3` left and right integrals: `C^[m]` for `m = 2..N` and
    /// `C_[m]` for `m = 2..N-1`.
    pub fn universal_integrals(&self) -> Result<Vec<(String, CasimirExprs)>, ModelError> {
        universal_integrals(&self.dunkl)
    }

    pub fn extra_integrals(&self) -> Result<Vec<(String, Expr)>, ModelError> {
        let d = &self.dunkl;
        let n = d.dims();
        let fe = self.fe();
        let h = &self.hamiltonian;
        let omega2 = fe.sq(Param::Omega);
        let mut out = Vec::new();
        match self.spec.kind {
            ModelKind::Osc | ModelKind::DarbouxIII => {
                let factor = if self.spec.kind == ModelKind::Osc {
                    Expr::mul_by(omega2.clone())
                } else {
                    Expr::mul_by(omega2.clone()) - (self.param(Param::Lambda) * h).scale_int(2)
                };
                for i in 0..n {
                    for j in i..n {
                        let f = d.pi(i) * d.pi(j) + Expr::mul_by(fe.xx(i, j)) * &factor;
                        out.push((format!("F_{}{}", i + 1, j + 1), f));
                    }
                }
            }
            ModelKind::SW | ModelKind::GenDarbouxIII => {
                let factor = if self.spec.kind == ModelKind::SW {
                    Expr::mul_by(omega2.clone())
                } else {
                    Expr::mul_by(omega2.clone()) - (self.param(Param::Lambda) * h).scale_int(2)
                };
                for i in 0..n {
                    let mut f = d.pi(i) * d.pi(i) + d.x_pow(i, 2) * &factor;
                    if let Some(c) = d.centrifugal_coeff(i) {
                        f = f + d.x_pow(i, -2) * c;
                    }
                    out.push((format!("F_{}", i + 1), f));
                }
            }
            ModelKind::Higgs | ModelKind::CurvedSW => {
                for i in 0..n {
                    let mut f = self.higgs_integral(i);
                    let label = if self.spec.kind == ModelKind::Higgs {
                        format!("I_{}", i + 1)
                    } else {
                        if let Some(c) = d.centrifugal_coeff(i) {
                            let w = fe.mul(&fe.atom_pow(Atom::KMinus, 2), &fe.x(i, -2));
                            f = f + (Expr::mul_by(w) * c).scale_c(half());
                        }
                        format!("J_{}", i + 1)
                    };
                    out.push((label, f));
                }
            }
            ModelKind::KC | ModelKind::CurvedKC | ModelKind::TaubNUT => {
                for i in 0..n {
                    out.push((format!("A_{}", i + 1), self.lrl(i)?));
                }
            }
            ModelKind::QGenKC | ModelKind::QGenCurvedKC | ModelKind::QGenTaubNUT => {
                out.push((format!("A_{n}"), self.lrl(n - 1)?));
            }
        }
        Ok(out)
    }

    fn param(&self, p: Param) -> Expr {
        self.dunkl.param(p)
    }

    /// `I_i` of the curved oscillator.
    fn higgs_integral(&self, i: usize) -> Expr {
        let d = &self.dunkl;
        let fe = self.fe();
        let n = d.dims() as i64;
        let g = d.gamma_k(i);
        let omega2 = fe.sq(Param::Omega);
        let pot = fe.mul(&fe.mul(&omega2, &fe.x(i, 2)), &fe.atom_inv(Atom::KMinus, 2));
        let mut out = (&g * &g).scale_c(half()) + Expr::mul_by(pot).scale_c(half());
        if n != 2 {
            let kappa = fe.param(Param::Kappa);
            // hbar kappa (-i x_i Gamma_i + hbar kappa (S mu_i R_i + (S - N x_i^2)/2))
            let first = (d.x(i) * &g).scale(&ParamScalar::imag_unit().neg());
            let s = fe.s();
            let tail = Expr::mul_by(fe.mul(&s, &fe.param(Param::Mu(i)))) * d.refl(i)
                + Expr::mul_by(fe.sub(&s, &fe.scale(&fe.x(i, 2), n))).scale_c(half());
            let tail = Expr::mul_by(fe.mul(&fe.hbar(), &kappa)) * tail;
            let block = Expr::mul_by(fe.mul(&fe.hbar(), &kappa)) * (first + tail);
            out = out + block.scale_int(n - 2);
        }
        out
    }

    /// The Laplace-Runge-Lenz type integral along axis `i`.
    fn lrl(&self, i: usize) -> Result<Expr, ModelError> {
        let d = &self.dunkl;
        let fe = self.fe();
        let n = d.dims();
        let kind = self.spec.kind;
        let qgen = kind.centrifugal() == Centrifugal::AllButLast;
        let curved = kind.curved();
        let mom = |j: usize| if curved { d.gamma_k(j) } else { d.pi(j) };
        let mut items = Vec::new();
        for j in 0..n {
            if j == i {
                continue;
            }
            let l = d.lambda(i, j).expect("distinct axes");
            items.push(Expr::anticommutator(&l, &mom(j)).scale_c(half()));
            if qgen {
                if let Some(c) = d.centrifugal_coeff(j) {
                    let mut w = fe.mul(&fe.x(i, 1), &fe.x(j, -2));
                    if curved {
                        w = fe.mul(&w, &fe.atom(Atom::KMinus));
                    }
                    items.push(Expr::mul_by(w) * c);
                }
            }
        }
        let radial = fe.mul(&fe.mul(&fe.x(i, 1), &fe.r()?), &fe.atom_inv(Atom::S, 1));
        let strength = if kind.taub_nut() {
            self.param(Param::K) + self.param(Param::Eta) * &self.hamiltonian
        } else {
            self.param(Param::K)
        };
        items.push(-(Expr::mul_by(radial) * strength));
        items.push((self.param(Param::Mu(i)) * d.refl(i) * mom(i)).scale(&ih()));
        if curved && n != 2 {
            let shift = d.mu_r(0..n) + d.constant(GaussRat::frac(n as i64 - 1, 2));
            let body = d.x_sq() * d.pi(i) - d.x(i) * d.x_dot_pi(0..n) + (d.x(i) * shift).scale(&ih());
            let kappa = self.param(Param::Kappa);
            items.push((kappa * body).scale(&ih().scale(&GaussRat::int(n as i64 - 2))));
        }
        Ok(Expr::sum(items))
    }

    /// Decomposition and functional identities owed by this model.
    pub fn identities(&self) -> Result<Vec<NamedIdentity>, ModelError> {
        let d = &self.dunkl;
        let n = d.dims();
        let h = &self.hamiltonian;
        let kind = self.spec.kind;
        let extra = self.extra_integrals()?;
        let mut out = Vec::new();
        let diag_sum = |names: &dyn Fn(usize) -> String| -> Expr {
            Expr::sum(extra.iter().filter(|(l, _)| (0..n).any(|i| *l == names(i))).map(|(_, e)| e.clone()))
        };
        match kind {
            ModelKind::Osc | ModelKind::DarbouxIII => {
                let s = diag_sum(&|i| format!("F_{}{}", i + 1, i + 1));
                out.push(NamedIdentity {
                    label: "H = 1/2 sum_i F_ii".into(),
                    reference: "trace of the Demkov-Fradkin type tensor".into(),
                    lhs: h.clone(),
                    rhs: s.scale_c(half()),
                });
            }
            ModelKind::SW | ModelKind::GenDarbouxIII => {
                let s = diag_sum(&|i| format!("F_{}", i + 1));
                out.push(NamedIdentity {
                    label: "H = 1/2 sum_i F_i".into(),
                    reference: "separation into one-dimensional Hamiltonians".into(),
                    lhs: h.clone(),
                    rhs: s.scale_c(half()),
                });
            }
            ModelKind::Higgs | ModelKind::CurvedSW => {
                let s = Expr::sum(extra.iter().map(|(_, e)| e.clone()));
                let base = if kind == ModelKind::Higgs {
                    d.lambda_sq_range(0..n)
                } else {
                    d.left_casimir_expr(n)?.momentum
                };
                let tail = self.curvature_tail();
                let rhs = s + (self.param(Param::Kappa) * (base + tail.scale(&hbar_sq()))).scale_int(2);
                let (label, what) = if kind == ModelKind::Higgs {
                    ("H = sum_i I_i + 2 kappa (Lambda^2 + hbar^2 (...))", "Lambda^2")
                } else {
                    ("H = sum_i J_i + 2 kappa (C^[N] + hbar^2 (...))", "C^[N]")
                };
                out.push(NamedIdentity {
                    label: label.into(),
                    reference: format!("curvature decomposition through {what}"),
                    lhs: h.clone(),
                    rhs,
                });
            }
            ModelKind::KC | ModelKind::TaubNUT => {
                let s = Expr::sum(extra.iter().map(|(_, e)| e * e));
                let shift = d.mu_r(0..n) + d.constant(GaussRat::frac(n as i64 - 1, 2));
                let inner = d.lambda_sq_range(0..n) + (&shift * &shift).scale(&hbar_sq());
                let strength = if kind == ModelKind::TaubNUT {
                    self.param(Param::K) + self.param(Param::Eta) * h
                } else {
                    self.param(Param::K)
                };
                let rhs = (h * inner).scale_int(2) + &strength * &strength;
                let label = if kind == ModelKind::KC {
                    "sum_i A_i^2 = 2H (Lambda^2 + hbar^2 (sum mu_i R_i + (N-1)/2)^2) + k^2"
                } else {
                    "sum_i A_i^2 = 2H (Lambda^2 + hbar^2 (sum mu_i R_i + (N-1)/2)^2) + (k + eta H)^2"
                };
                out.push(NamedIdentity {
                    label: label.into(),
                    reference: "functional relation of the Laplace-Runge-Lenz vector".into(),
                    lhs: s,
                    rhs,
                });
            }
            _ => {}
        }
        Ok(out)
    }

    /// `sum mu_i (mu_i + N/2 R_i) + 2 sum_{i<j} mu_i mu_j R_i R_j`.
    fn curvature_tail(&self) -> Expr {
        let d = &self.dunkl;
        let n = d.dims();
        let mut items = Vec::new();
        for i in 0..n {
            let mu = self.param(Param::Mu(i));
            items.push(&mu * (&mu + d.refl(i).scale_c(GaussRat::frac(n as i64, 2))));
            for j in i + 1..n {
                items.push((self.param(Param::Mu(i)) * self.param(Param::Mu(j)) * d.refl(i) * d.refl(j)).scale_int(2));
            }
        }
        Expr::sum(items)
    }
}

/// `C^[m]` (`m = 2..N`) and `C_[m]` (`m = 2..N-1`) for any realization.
pub fn universal_integrals(d: &Dunkl) -> Result<Vec<(String, CasimirExprs)>, ModelError> {
    let n = d.dims();
    let mut out = Vec::new();
    for m in 2..=n {
        out.push((format!("C^[{m}]"), d.left_casimir_expr(m)?));
    }
    for m in 2..n {
        out.push((format!("C_[{m}]"), d.right_casimir_expr(m)?));
    }
    Ok(out)
}

fn build_hamiltonian_expr(kind: ModelKind, d: &Dunkl) -> Result<Expr, ModelError> {
    let fe = Fe(d.ring());
    let n = d.dims();
    let j_plus = d.sl2(0..n)?.j_plus;
    let omega2 = fe.sq(Param::Omega);
    let half_jp = j_plus.scale_c(half());
    let k = fe.param(Param::K);
    Ok(match kind {
        ModelKind::Osc | ModelKind::SW => half_jp + Expr::mul_by(fe.mul(&omega2, &fe.s())).scale_c(half()),
        ModelKind::Higgs | ModelKind::CurvedSW => {
            let pot = fe.mul(&fe.mul(&omega2, &fe.s()), &fe.atom_inv(Atom::KMinus, 2));
            Expr::mul_by(fe.atom_pow(Atom::KPlus, 2)) * half_jp + Expr::mul_by(pot).scale_c(half())
        }
        ModelKind::DarbouxIII | ModelKind::GenDarbouxIII => {
            let body = j_plus + Expr::mul_by(fe.mul(&omega2, &fe.s()));
            (Expr::mul_by(fe.atom_inv(Atom::L, 1)) * body).scale_c(half())
        }
        ModelKind::KC | ModelKind::QGenKC => {
            let pot = fe.mul(&fe.mul(&k, &fe.r()?), &fe.atom_inv(Atom::S, 1));
            half_jp - Expr::mul_by(pot)
        }
        ModelKind::CurvedKC | ModelKind::QGenCurvedKC => {
            let pot = fe.mul(&fe.mul(&k, &fe.r()?), &fe.mul(&fe.atom(Atom::KMinus), &fe.atom_inv(Atom::S, 1)));
            Expr::mul_by(fe.atom_pow(Atom::KPlus, 2)) * half_jp - Expr::mul_by(pot)
        }
        ModelKind::TaubNUT | ModelKind::QGenTaubNUT => {
            // |x|/(eta+|x|) = (eta r - S)/Q and 1/(eta+|x|) = (eta - r)/Q.
            let eta = fe.param(Param::Eta);
            let r = fe.r()?;
            let qinv = fe.atom_inv(Atom::QEta, 1);
            let kin = fe.mul(&fe.sub(&fe.mul(&eta, &r), &fe.s()), &qinv);
            let pot = fe.mul(&fe.mul(&k, &fe.sub(&eta, &r)), &qinv);
            Expr::mul_by(kin) * half_jp - Expr::mul_by(pot)
        }
    })
}

/// Thin wrapper to keep coefficient arithmetic readable.
struct Fe<'a>(&'a Ring);

impl Fe<'_> {
    fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.0.mul_raw(a, b)
    }
    fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.0.add_raw(a, &self.0.neg(b))
    }
    fn scale(&self, a: &FieldElem, n: i64) -> FieldElem {
        self.0.scale(a, &GaussRat::int(n))
    }
    fn param(&self, p: Param) -> FieldElem {
        self.0.param(p)
    }
    fn sq(&self, p: Param) -> FieldElem {
        let v = self.param(p);
        self.mul(&v, &v)
    }
    fn hbar(&self) -> FieldElem {
        self.0.param(Param::Hbar)
    }
    fn x(&self, i: usize, e: i8) -> FieldElem {
        self.0.x_pow(i, e)
    }
    fn xx(&self, i: usize, j: usize) -> FieldElem {
        self.mul(&self.x(i, 1), &self.x(j, 1))
    }
    fn s(&self) -> FieldElem {
        self.0.from_poly(self.0.s_poly())
    }
    fn r(&self) -> Result<FieldElem, RingError> {
        self.0.r()
    }
    fn atom(&self, a: Atom) -> FieldElem {
        self.0.atom(a)
    }
    fn atom_pow(&self, a: Atom, m: u32) -> FieldElem {
        self.0.from_poly(self.0.atom_poly(a).pow(m, self.0.dims()))
    }
    fn atom_inv(&self, a: Atom, m: u8) -> FieldElem {
        self.0.atom_inv(a, m)
    }
}

pub fn build_hamiltonian(spec: &ModelSpec) -> Result<NormalOp, ModelError> {
    let m = Model::symbolic(*spec)?;
    Ok(m.dunkl.normalize(&m.hamiltonian)?)
}

pub fn build_extra_integrals(spec: &ModelSpec) -> Result<Vec<(String, NormalOp)>, ModelError> {
    let m = Model::symbolic(*spec)?;
    m.extra_integrals()?
        .into_iter()
        .map(|(l, e)| Ok((l, m.dunkl.normalize(&e)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Rat;

    fn zero(m: &Model, e: &Expr) -> bool {
        m.dunkl.normalize(e).unwrap().is_zero()
    }

    #[test]
    fn catalog_shape() {
        let c = catalog();
        assert_eq!(c.len(), 12);
        let q = c.iter().find(|i| i.name == "qgenkc").unwrap();
        assert_eq!(q.centrifugal, "beta_N = gamma_N = 0");
        assert!(c.iter().filter(|i| i.needs_radial).all(|i| i.min_dims == 2));
    }

    #[test]
    fn kc_rejects_one_dim() {
        let e = ModelSpec::new(ModelKind::KC, 1).unwrap_err();
        assert_eq!(e.to_string(), "KC-family requires N ≥ 2");
        assert_eq!("TaubNUT".parse::<ModelKind>().unwrap(), ModelKind::TaubNUT);
    }

    #[test]
    fn osc_on_constant_probe() {
        let m = Model::symbolic(ModelSpec::new(ModelKind::Osc, 2).unwrap()).unwrap();
        let ring = m.ring().clone();
        let h = m.dunkl.normalize(&m.hamiltonian).unwrap();
        let got = h.apply_to(&ring.one()).unwrap();
        let w2 = ring.mul(&ring.param(Param::Omega), &ring.param(Param::Omega)).unwrap();
        let want = ring.scale(&ring.mul(&w2, &ring.from_poly(ring.s_poly())).unwrap(), &GaussRat::frac(1, 2));
        assert_eq!(got, want);
    }

    #[test]
    fn osc_tensor_and_trace() {
        let m = Model::symbolic(ModelSpec::new(ModelKind::Osc, 2).unwrap()).unwrap();
        for (_, f) in m.extra_integrals().unwrap() {
            assert!(zero(&m, &Expr::commutator(&m.hamiltonian, &f)));
        }
        for id in m.identities().unwrap() {
            assert!(zero(&m, &(id.lhs - id.rhs)));
        }
    }

    #[test]
    fn kc_functional_relation_two_dims() {
        let m = Model::symbolic(ModelSpec::new(ModelKind::KC, 2).unwrap()).unwrap();
        for (_, a) in m.extra_integrals().unwrap() {
            assert!(zero(&m, &Expr::commutator(&m.hamiltonian, &a)));
        }
        for id in m.identities().unwrap() {
            assert!(zero(&m, &(id.lhs - id.rhs)), "{}", id.label);
        }
    }

    #[test]
    fn flat_limits() {
        for (curved, eps) in [(ModelKind::DarbouxIII, Param::Lambda), (ModelKind::TaubNUT, Param::Eta)] {
            let spec = ModelSpec::new(curved, 2).unwrap();
            let flat = ModelSpec::new(curved.flat_limit().unwrap(), 2).unwrap();
            let ring = spec.config.ring().unwrap().specialize(&[(eps, Rat::ZERO)]).unwrap();
            let a = build_hamiltonian(&spec).unwrap().substitute(&ring).unwrap();
            let b = Model::new(flat, ring).unwrap();
            let b = b.dunkl.normalize(&b.hamiltonian).unwrap();
            assert!(a == b, "{curved}");
        }
    }
}
