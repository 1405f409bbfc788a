//! One-dimensional signals: windows, wavelets and test functions.
//!
//! A [`Signal`] is a finite sum of terms `A·e^{2πiμt}·d^{-1/2}·φ((t − s)/d)`
//! where `φ` is either a closed-form shape or linearly interpolated samples.
//! Translation, modulation and dilation act on the term parameters, so atoms
//! `g_z` and `ψ_z` stay exact closed forms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};

const FOURTH_ROOT_2: f64 = 1.189_207_115_002_721;

/// Closed-form signal shapes.
///
/// Poisson shapes use `(t + i)^p` on the principal branch with
/// `p = −(α + 1)/2`; `alpha` follows the wavelet convention and must exceed 1
/// for admissibility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Descriptor {
    /// `2^{1/4} e^{−πt²}`, unit norm.
    Gaussian,
    /// The `n`-th Hermite function, orthonormal, with `Hermite(0) = Gaussian`.
    Hermite(usize),
    /// `w^{-1/2}` on `[−w/2, w/2]`, unit norm.
    Box {
        width: f64,
    },
    /// `(1 − 2πt²) e^{−πt²}`, not normalized.
    MexicanHat,
    PoissonReal {
        alpha: f64,
    },
    PoissonImag {
        alpha: f64,
    },
    PoissonComplex {
        alpha: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PoissonPart {
    Re,
    Im,
    Complex,
}

impl Descriptor {
    /// Poisson shape `Re (t + i)^p` given the raw exponent `p < −1`.
    pub fn real_power(p: f64) -> Descriptor {
        Descriptor::PoissonReal { alpha: -2.0 * p - 1.0 }
    }

    /// Poisson shape `Im (t + i)^p` given the raw exponent `p < −1`.
    pub fn imag_power(p: f64) -> Descriptor {
        Descriptor::PoissonImag { alpha: -2.0 * p - 1.0 }
    }

    /// Poisson shape `(t + i)^p` given the raw exponent `p < −1`.
    pub fn complex_power(p: f64) -> Descriptor {
        Descriptor::PoissonComplex { alpha: -2.0 * p - 1.0 }
    }

    /// Exponent on `(t + i)` for Poisson shapes.
    pub fn exponent(&self) -> Option<f64> {
        self.poisson().map(|(alpha, _)| -(alpha + 1.0) / 2.0)
    }

    fn poisson(&self) -> Option<(f64, PoissonPart)> {
        match *self {
            Descriptor::PoissonReal { alpha } => Some((alpha, PoissonPart::Re)),
            Descriptor::PoissonImag { alpha } => Some((alpha, PoissonPart::Im)),
            Descriptor::PoissonComplex { alpha } => Some((alpha, PoissonPart::Complex)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Descriptor::Box { width } if !(width > 0.0 && width.is_finite()) => {
                Err(invalid("width", format!("box width must be positive, got {width}")))
            }
            Descriptor::PoissonReal { alpha }
            | Descriptor::PoissonImag { alpha }
            | Descriptor::PoissonComplex { alpha }
                if !(alpha > 0.0 && alpha.is_finite()) =>
            {
                // α ∈ (0, 1] still decays but is not admissible; that is
                // reported by `admissibility`, not rejected here.
                Err(invalid("alpha", format!("Poisson alpha must be positive, got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, t: f64) -> Complex64 {
        match *self {
            Descriptor::Gaussian => Complex64::new(FOURTH_ROOT_2 * (-PI * t * t).exp(), 0.0),
            Descriptor::Hermite(n) => Complex64::new(hermite_function(n, t), 0.0),
            Descriptor::Box { width } => {
                if t.abs() <= 0.5 * width {
                    Complex64::new(width.sqrt().recip(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Descriptor::MexicanHat => Complex64::new((1.0 - 2.0 * PI * t * t) * (-PI * t * t).exp(), 0.0),
            _ => {
                let (alpha, part) = self.poisson().expect("poisson descriptor");
                let w = cpow(Complex64::new(t, 1.0), -(alpha + 1.0) / 2.0);
                match part {
                    PoissonPart::Re => Complex64::new(w.re, 0.0),
                    PoissonPart::Im => Complex64::new(w.im, 0.0),
                    PoissonPart::Complex => w,
                }
            }
        }
    }

    /// Closed-form Fourier transform `∫ φ(t) e^{−2πiξt} dt`.
    fn fourier(&self, xi: f64) -> Complex64 {
        match *self {
            Descriptor::Gaussian => Complex64::new(FOURTH_ROOT_2 * (-PI * xi * xi).exp(), 0.0),
            Descriptor::Hermite(n) => {
                let phase = match n % 4 {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, -1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, 1.0),
                };
                phase * hermite_function(n, xi)
            }
            Descriptor::Box { width } => {
                let v = if xi == 0.0 {
                    width
                } else {
                    (PI * xi * width).sin() / (PI * xi)
                };
                Complex64::new(v / width.sqrt(), 0.0)
            }
            Descriptor::MexicanHat => Complex64::new(2.0 * PI * xi * xi * (-PI * xi * xi).exp(), 0.0),
            _ => {
                let (alpha, part) = self.poisson().expect("poisson descriptor");
                let s = (alpha + 1.0) / 2.0;
                let w = |xi: f64| poisson_spectrum(s, xi);
                match part {
                    PoissonPart::Complex => w(xi),
                    PoissonPart::Re => 0.5 * (w(xi) + w(-xi).conj()),
                    PoissonPart::Im => (w(xi) - w(-xi).conj()) / Complex64::new(0.0, 2.0),
                }
            }
        }
    }

    /// Truncation radius beyond which the shape is treated as zero.
    fn support_radius(&self) -> f64 {
        match *self {
            Descriptor::Gaussian | Descriptor::MexicanHat => 8.0,
            Descriptor::Hermite(n) => 8.0 + ((2 * n + 1) as f64 / (2.0 * PI)).sqrt(),
            Descriptor::Box { width } => 0.5 * width,
            _ => {
                let p = self.exponent().expect("poisson descriptor").abs();
                // |t + i|^p < 1e-6 beyond T.
                10f64.powf(6.0 / p)
            }
        }
    }

    /// Length scale on which the shape varies.
    fn feature_scale(&self) -> f64 {
        match *self {
            Descriptor::Hermite(n) => 1.0 / ((n + 1) as f64).sqrt(),
            Descriptor::Box { width } => width.min(1.0),
            _ => 1.0,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Descriptor::Box { width } => vec![-0.5 * width, 0.5 * width],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Gaussian => f.write_str("gaussian"),
            Descriptor::Hermite(n) => write!(f, "hermite:{n}"),
            Descriptor::Box { width } => write!(f, "box:{width}"),
            Descriptor::MexicanHat => f.write_str("mexican-hat"),
            Descriptor::PoissonReal { alpha } => write!(f, "poisson-real:{alpha}"),
            Descriptor::PoissonImag { alpha } => write!(f, "poisson-imag:{alpha}"),
            Descriptor::PoissonComplex { alpha } => write!(f, "poisson-complex:{alpha}"),
        }
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    /// Parses `gaussian`, `hermite:n`, `box:w`, `mexican-hat`,
    /// `poisson-real:α` (also `-imag`, `-complex`) and the raw-exponent forms
    /// `re-power:p`, `im-power:p`, `power:p` for `(t + i)^p`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.as_str(), None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Parse(format!("descriptor `{s}` needs a parameter")))?;
            a.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{a}` in descriptor `{s}`")))
        };
        let d = match name {
            "gaussian" | "gauss" => Descriptor::Gaussian,
            "mexican-hat" | "mexican_hat" | "mexicanhat" => Descriptor::MexicanHat,
            "hermite" => {
                let a = arg.ok_or_else(|| Error::Parse("hermite needs an order".into()))?;
                Descriptor::Hermite(
                    a.parse()
                        .map_err(|_| Error::Parse(format!("bad hermite order `{a}`")))?,
                )
            }
            "box" => Descriptor::Box {
                width: match arg {
                    Some(_) => num(arg)?,
                    None => 1.0,
                },
            },
            "poisson-real" => Descriptor::PoissonReal { alpha: num(arg)? },
            "poisson-imag" => Descriptor::PoissonImag { alpha: num(arg)? },
            "poisson-complex" => Descriptor::PoissonComplex { alpha: num(arg)? },
            "re-power" => Descriptor::real_power(num(arg)?),
            "im-power" => Descriptor::imag_power(num(arg)?),
            "power" => Descriptor::complex_power(num(arg)?),
            other => return Err(Error::Parse(format!("unknown signal descriptor `{other}`"))),
        };
        d.validate()?;
        Ok(d)
    }
}

impl TryFrom<String> for Descriptor {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Descriptor> for String {
    fn from(d: Descriptor) -> String {
        d.to_string()
    }
}

/// `z^p` on the principal branch, with exact integer and half-integer paths.
pub(crate) fn cpow(z: Complex64, p: f64) -> Complex64 {
    let twice = 2.0 * p;
    if (p - p.round()).abs() < 1e-12 && p.abs() < 64.0 {
        z.powi(p.round() as i32)
    } else if (twice - twice.round()).abs() < 1e-12 && p.abs() < 64.0 {
        z.powi((p - 0.5).round() as i32) * z.sqrt()
    } else {
        z.powf(p)
    }
}

/// Fourier transform of `(t + i)^{−s}`: supported on `ξ > 0`, equal to
/// `e^{−iπs/2} (2π)^s ξ^{s−1} e^{−2πξ} / Γ(s)`.
fn poisson_spectrum(s: f64, xi: f64) -> Complex64 {
    if xi <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let log_mag = s * (2.0 * PI).ln() + (s - 1.0) * xi.ln() - 2.0 * PI * xi - ln_gamma(s);
    Complex64::from_polar(log_mag.exp(), -PI * s / 2.0)
}

/// Orthonormal Hermite function `h_n(t)` by the three-term recurrence.
pub fn hermite_function(n: usize, t: f64) -> f64 {
    let u = (2.0 * PI).sqrt() * t;
    let mut prev = 0.0;
    let mut cur = FOURTH_ROOT_2 * (-PI * t * t).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * u * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Uniform samples, linearly interpolated and zero outside their span.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    t0: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl Samples {
    pub fn new(t0: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("step", format!("sample step must be positive, got {step}")));
        }
        if values.len() < 2 {
            return Err(invalid("samples", "need at least two samples"));
        }
        if !t0.is_finite() {
            return Err(invalid("t0", "sample origin must be finite"));
        }
        Ok(Self { t0, step, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.step * (self.values.len() - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| self.t0 + self.step * k as f64)
    }

    fn eval(&self, t: f64) -> Complex64 {
        let pos = (t - self.t0) / self.step;
        let last = (self.values.len() - 1) as f64;
        if !(pos >= 0.0 && pos <= last) {
            return Complex64::new(0.0, 0.0);
        }
        let k = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - k as f64;
        self.values[k] * (1.0 - frac) + self.values[k + 1] * frac
    }

    fn fourier(&self, xi: f64) -> Complex64 {
        let n = self.values.len();
        let rot = Complex64::from_polar(1.0, -2.0 * PI * xi * self.step);
        let mut phase = Complex64::from_polar(1.0, -2.0 * PI * xi * self.t0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in self.values.iter().enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            acc += v * phase * w;
            phase *= rot;
        }
        acc * self.step
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Closed(Descriptor),
    Sampled(Arc<Samples>),
}

#[derive(Clone, Debug, PartialEq)]
struct Term {
    shape: Shape,
    amplitude: Complex64,
    shift: f64,
    modulation: f64,
    dilation: f64,
}

impl Term {
    fn eval(&self, t: f64) -> Complex64 {
        let s = (t - self.shift) / self.dilation;
        let base = match &self.shape {
            Shape::Closed(d) => {
                if s.abs() > d.support_radius() {
                    return Complex64::new(0.0, 0.0);
                }
                d.eval(s)
            }
            Shape::Sampled(samples) => samples.eval(s),
        };
        let phase = if self.modulation == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, 2.0 * PI * self.modulation * t)
        };
        self.amplitude * phase * base / self.dilation.sqrt()
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = match &self.shape {
            Shape::Closed(d) => {
                let r = d.support_radius();
                (-r, r)
            }
            Shape::Sampled(s) => (s.t0, s.end()),
        };
        (self.shift + self.dilation * lo, self.shift + self.dilation * hi)
    }

    fn scale(&self) -> f64 {
        let base = match &self.shape {
            Shape::Closed(d) => d.feature_scale(),
            Shape::Sampled(s) => s.step,
        };
        base * self.dilation
    }

    fn fourier(&self, xi: f64) -> Complex64 {
        let nu = self.dilation * (xi - self.modulation);
        let base = match &self.shape {
            Shape::Closed(d) => d.fourier(nu),
            Shape::Sampled(s) => s.fourier(nu),
        };
        self.amplitude
            * self.dilation.sqrt()
            * Complex64::from_polar(1.0, -2.0 * PI * (xi - self.modulation) * self.shift)
            * base
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Closed(d) => d
                .breakpoints()
                .into_iter()
                .map(|b| self.shift + self.dilation * b)
                .collect(),
            Shape::Sampled(_) => Vec::new(),
        }
    }
}

/// A signal on the real line.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Signal {
    terms: Vec<Term>,
}

impl Signal {
    pub fn zero() -> Signal {
        Signal { terms: Vec::new() }
    }

    pub fn closed(descriptor: Descriptor) -> Result<Signal> {
        descriptor.validate()?;
        Ok(Self::from_shape(Shape::Closed(descriptor)))
    }

    pub fn gaussian() -> Signal {
        Self::from_shape(Shape::Closed(Descriptor::Gaussian))
    }

    pub fn hermite(n: usize) -> Signal {
        Self::from_shape(Shape::Closed(Descriptor::Hermite(n)))
    }

    pub fn boxcar(width: f64) -> Result<Signal> {
        Self::closed(Descriptor::Box { width })
    }

    pub fn mexican_hat() -> Signal {
        Self::from_shape(Shape::Closed(Descriptor::MexicanHat))
    }

    pub fn poisson_real(alpha: f64) -> Result<Signal> {
        Self::closed(Descriptor::PoissonReal { alpha })
    }

    pub fn poisson_imag(alpha: f64) -> Result<Signal> {
        Self::closed(Descriptor::PoissonImag { alpha })
    }

    pub fn poisson_complex(alpha: f64) -> Result<Signal> {
        Self::closed(Descriptor::PoissonComplex { alpha })
    }

    pub fn sampled(samples: Samples) -> Signal {
        Self::from_shape(Shape::Sampled(Arc::new(samples)))
    }

    pub fn from_samples(t0: f64, step: f64, values: Vec<Complex64>) -> Result<Signal> {
        Ok(Self::sampled(Samples::new(t0, step, values)?))
    }

    fn from_shape(shape: Shape) -> Signal {
        Signal {
            terms: vec![Term {
                shape,
                amplitude: Complex64::new(1.0, 0.0),
                shift: 0.0,
                modulation: 0.0,
                dilation: 1.0,
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.amplitude == Complex64::new(0.0, 0.0))
    }

    /// The descriptor, when the signal is a single closed-form term.
    pub fn descriptor(&self) -> Option<Descriptor> {
        match self.terms.as_slice() {
            [Term {
                shape: Shape::Closed(d),
                ..
            }] => Some(*d),
            _ => None,
        }
    }

    /// Samples of a single-term sampled signal.
    pub fn samples(&self) -> Option<&Samples> {
        match self.terms.as_slice() {
            [Term {
                shape: Shape::Sampled(s),
                ..
            }] => Some(s),
            _ => None,
        }
    }

    /// Short human-readable description for reports.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let base = match &t.shape {
                    Shape::Closed(d) => d.to_string(),
                    Shape::Sampled(s) => format!("samples[{}]", s.values.len()),
                };
                let mut out = base;
                if t.shift != 0.0 || t.modulation != 0.0 || t.dilation != 1.0 {
                    out = format!("{out}@(x={},xi={},d={})", t.shift, t.modulation, t.dilation);
                }
                if t.amplitude != Complex64::new(1.0, 0.0) {
                    out = format!("({}{:+}i)*{out}", t.amplitude.re, t.amplitude.im);
                }
                out
            })
            .collect();
        if parts.is_empty() {
            "zero".to_string()
        } else {
            parts.join(" + ")
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// `f(t − a)`.
    pub fn translate(&self, a: f64) -> Signal {
        self.map_terms(|t| {
            t.amplitude *= Complex64::from_polar(1.0, -2.0 * PI * t.modulation * a);
            t.shift += a;
        })
    }

    /// `e^{2πiηt} f(t)`.
    pub fn modulate(&self, eta: f64) -> Signal {
        self.map_terms(|t| t.modulation += eta)
    }

    /// `a^{-1/2} f(t/a)`, unitary for `a > 0`.
    ///
    /// Panics if `a` is not positive.
    pub fn dilate(&self, a: f64) -> Signal {
        assert!(a > 0.0 && a.is_finite(), "dilation must be positive, got {a}");
        self.map_terms(|t| {
            t.modulation /= a;
            t.shift *= a;
            t.dilation *= a;
        })
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Signal {
        let c = c.into();
        self.map_terms(|t| t.amplitude *= c)
    }

    pub fn add(&self, other: &Signal) -> Signal {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Signal { terms }
    }

    /// Gabor atom `e^{−2πiyt} f(t − x)`.
    pub fn gabor_atom(&self, x: f64, y: f64) -> Signal {
        self.translate(x).modulate(-y)
    }

    /// Wavelet atom `y^{-1/2} f((t − x)/y)`.
    pub fn wavelet_atom(&self, x: f64, y: f64) -> Signal {
        self.dilate(y).translate(x)
    }

    fn map_terms(&self, f: impl Fn(&mut Term)) -> Signal {
        let mut terms = self.terms.clone();
        terms.iter_mut().for_each(f);
        Signal { terms }
    }

    /// Hull of the term supports, `None` for the empty signal.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.terms
            .iter()
            .map(Term::support)
            .reduce(|(a0, a1), (b0, b1)| (a0.min(b0), a1.max(b1)))
    }

    /// Smallest length scale over the terms.
    pub fn feature_scale(&self) -> f64 {
        self.terms.iter().map(Term::scale).fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute modulation frequency over the terms.
    pub fn max_modulation(&self) -> f64 {
        self.terms.iter().map(|t| t.modulation.abs()).fold(0.0, f64::max)
    }

    /// Jump discontinuities, sorted.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.terms.iter().flat_map(Term::breakpoints).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// `f̂(ξ) = ∫ f(t) e^{−2πiξt} dt`, closed form for closed-form terms and
    /// trapezoid sums for sampled ones.
    pub fn fourier_at(&self, xi: f64) -> Complex64 {
        self.terms.iter().map(|t| t.fourier(xi)).sum()
    }

    /// Samples of the signal on `t0 + k·step`, `k < n`.
    pub fn sample(&self, t0: f64, step: f64, n: usize) -> Result<Signal> {
        let values = (0..n).map(|k| self.eval(t0 + step * k as f64)).collect();
        Signal::from_samples(t0, step, values)
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Signal::closed(s.parse()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Midpoint,
    Trapezoid,
}

/// Numerical parameters shared by the 1-D and phase-space quadratures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Half-width `R` of the phase-space box (plane) or of the `x` range
    /// (half-plane).
    pub radius: f64,
    /// Phase-space grid step; in the half-plane it is the step in both `x`
    /// and `log y`.
    pub step: f64,
    /// Time step of the 1-D quadrature at unit feature scale.
    pub time_step: f64,
    pub scheme: Scheme,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radius: 4.0,
            step: 0.05,
            time_step: 0.01,
            scheme: Scheme::Midpoint,
            y_min: 1.0 / 16.0,
            y_max: 16.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("step", format!("must be positive, got {}", self.step)));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(invalid(
                "time_step",
                format!("must be positive, got {}", self.time_step),
            ));
        }
        if !(self.radius >= 1.0 && self.radius.is_finite()) {
            return Err(invalid("radius", format!("must be at least 1, got {}", self.radius)));
        }
        if !(self.y_min > 0.0 && self.y_min < 1.0 && self.y_max > 1.0 && self.y_max.is_finite()) {
            return Err(invalid(
                "y_min/y_max",
                format!("need 0 < y_min < 1 < y_max, got [{}, {}]", self.y_min, self.y_max),
            ));
        }
        Ok(())
    }

    /// Time step for a product of the two signals.
    pub(crate) fn time_step_for(&self, f: &Signal, g: &Signal) -> f64 {
        let scale = f.feature_scale().min(g.feature_scale()).min(1.0);
        let mut dt = self.time_step * scale;
        let m = f.max_modulation() + g.max_modulation();
        if m > 0.0 {
            dt = dt.min(0.25 / m);
        }
        dt
    }
}

/// Calls `visit(t, w)` for the nodes and weights of a composite rule on
/// `[a, b]`, with panels split at `breaks`.
pub(crate) fn for_each_node(a: f64, b: f64, breaks: &[f64], dt: f64, scheme: Scheme, mut visit: impl FnMut(f64, f64)) {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    for pair in cuts.windows(2) {
        let (p0, p1) = (pair[0], pair[1]);
        let len = p1 - p0;
        if len <= 0.0 {
            continue;
        }
        let n = (len / dt).ceil().max(1.0) as usize;
        let h = len / n as f64;
        match scheme {
            Scheme::Midpoint => {
                for k in 0..n {
                    visit(p0 + (k as f64 + 0.5) * h, h);
                }
            }
            Scheme::Trapezoid => {
                // One-sided limits at the panel ends.
                let eps = 1e-9 * h;
                visit(p0 + eps, 0.5 * h);
                for k in 1..n {
                    visit(p0 + k as f64 * h, h);
                }
                visit(p1 - eps, 0.5 * h);
            }
        }
    }
}

/// Nodes and weights for integrating products of `f` and `g` over the
/// intersection of their supports.
pub(crate) fn product_nodes(f: &Signal, g: &Signal, q: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    let (Some((a0, a1)), Some((b0, b1))) = (f.support(), g.support()) else {
        return Ok(Vec::new());
    };
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if lo >= hi {
        return Err(Error::DisjointSupports { a0, a1, b0, b1 });
    }
    let mut breaks = f.discontinuities();
    breaks.extend(g.discontinuities());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut nodes = Vec::new();
    for_each_node(lo, hi, &breaks, q.time_step_for(f, g), q.scheme, |t, w| {
        nodes.push((t, w))
    });
    Ok(nodes)
}

/// `⟨f, g⟩ = ∫ f(t) conj(g(t)) dt` over the common support.
pub fn inner_product(f: &Signal, g: &Signal, q: &QuadratureSpec) -> Result<Complex64> {
    let nodes = product_nodes(f, g, q)?;
    Ok(nodes.iter().map(|&(t, w)| f.eval(t) * g.eval(t).conj() * w).sum())
}

/// Like [`inner_product`] but zero for disjoint supports.
pub(crate) fn inner_product_or_zero(f: &Signal, g: &Signal, q: &QuadratureSpec) -> Complex64 {
    match inner_product(f, g, q) {
        Ok(v) => v,
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

pub fn l2_norm(f: &Signal, q: &QuadratureSpec) -> f64 {
    let Some((a, b)) = f.support() else {
        return 0.0;
    };
    let mut acc = 0.0;
    for_each_node(a, b, &f.discontinuities(), q.time_step_for(f, f), q.scheme, |t, w| {
        acc += f.eval(t).norm_sqr() * w;
    });
    acc.sqrt()
}

/// Fourier transform sampled on `xi0 + k·step`, `k < n`, returned as a
/// sampled signal in the frequency variable.
pub fn fourier(f: &Signal, xi0: f64, step: f64, n: usize) -> Result<Signal> {
    let values = (0..n).map(|k| f.fourier_at(xi0 + step * k as f64)).collect();
    Signal::from_samples(xi0, step, values)
}

/// Fourier transform at `xi` by direct quadrature of the defining integral.
pub fn fourier_quadrature(f: &Signal, xi: f64, q: &QuadratureSpec) -> Complex64 {
    let Some((a, b)) = f.support() else {
        return Complex64::new(0.0, 0.0);
    };
    let mut dt = q.time_step * f.feature_scale().min(1.0);
    let m = f.max_modulation() + xi.abs();
    if m > 0.0 {
        dt = dt.min(0.25 / m);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_node(a, b, &f.discontinuities(), dt, q.scheme, |t, w| {
        acc += f.eval(t) * Complex64::from_polar(w, -2.0 * PI * xi * t);
    });
    acc
}

/// Outcome of the admissibility quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `∫₀^∞ |ψ̂(ξ)|²/ξ dξ` including the tail estimates; infinite when
    /// `admissible` is false.
    pub value: f64,
    /// Quadrature over `[xi_min, xi_max]` alone.
    pub core: f64,
    /// Power-law estimate of the mass on `(0, xi_min)`.
    pub low_tail: f64,
    /// Power-law estimate of the mass beyond `xi_max`.
    pub high_tail: f64,
    /// Fitted exponent `β` of `|ψ̂(ξ)|²/ξ ≈ Cξ^β` near zero.
    pub low_exponent: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub admissible: bool,
}

const ADM_XI_MIN: f64 = 1e-6;
const ADM_LOG_STEP: f64 = 0.005;

pub fn admissibility(psi: &Signal, q: &QuadratureSpec) -> Admissibility {
    admissibility_with_step(psi, ADM_LOG_STEP * (q.time_step / 0.01).min(1.0))
}

/// Admissibility with an explicit step in `log ξ`.
pub fn admissibility_with_step(psi: &Signal, log_step: f64) -> Admissibility {
    let density = |xi: f64| psi.fourier_at(xi).norm_sqr() / xi;
    let xi_min = ADM_XI_MIN;

    // Upper limit: where the spectrum is negligible against its largest value.
    let mut peak = 0.0f64;
    let mut xi_max = 1.0;
    let mut probe = 1e-3;
    while probe <= 1e4 {
        peak = peak.max(psi.fourier_at(probe).norm_sqr());
        probe *= 1.25;
    }
    while xi_max < 1e4 {
        let tail_max = (0..8)
            .map(|k| psi.fourier_at(xi_max * (1.0 + 0.125 * k as f64)).norm_sqr())
            .fold(0.0, f64::max);
        if tail_max <= 1e-24 * peak {
            break;
        }
        xi_max *= 2.0;
    }

    let (u0, u1) = (xi_min.ln(), f64::ln(xi_max));
    let n = ((u1 - u0) / log_step).ceil() as usize;
    let du = (u1 - u0) / n as f64;
    // ∫|ψ̂|²/ξ dξ = ∫|ψ̂(e^u)|² du.
    let core: f64 = (0..n)
        .map(|k| psi.fourier_at((u0 + (k as f64 + 0.5) * du).exp()).norm_sqr() * du)
        .sum();

    let (d1, d2) = (density(xi_min), density(10.0 * xi_min));
    let (low_exponent, low_tail) = if d1 <= 0.0 && d2 <= 0.0 {
        (f64::INFINITY, 0.0)
    } else if d1 <= 0.0 || d2 <= 0.0 {
        (f64::NAN, f64::INFINITY)
    } else {
        let beta = (d2 / d1).log10();
        let tail = if beta > -1.0 {
            d1 * xi_min / (beta + 1.0)
        } else {
            f64::INFINITY
        };
        (beta, tail)
    };

    let (h1, h2) = (density(xi_max / 10.0), density(xi_max));
    let high_tail = if h1 > 0.0 && h2 > 0.0 {
        let gamma = (h2 / h1).log10();
        if gamma < -1.0 {
            -h2 * xi_max / (gamma + 1.0)
        } else {
            h2 * xi_max
        }
    } else {
        0.0
    };

    let admissible = low_exponent > -0.95 && core > 0.0 && low_tail.is_finite();
    Admissibility {
        value: if admissible {
            core + low_tail + high_tail
        } else {
            f64::INFINITY
        },
        core,
        low_tail,
        high_tail,
        low_exponent,
        xi_min,
        xi_max,
        admissible,
    }
}

/// A wavelet rescaled to unit admissibility.
#[derive(Clone, Debug)]
pub struct NormalizedWavelet {
    pub signal: Signal,
    /// `‖ψ‖` after rescaling; it equals `k(i)^{1/2}` for the wavelet kernel.
    pub norm: f64,
    /// Admissibility of the input before rescaling.
    pub input_admissibility: Admissibility,
}

pub fn normalize_wavelet(psi: &Signal, q: &QuadratureSpec) -> Result<NormalizedWavelet> {
    let adm = admissibility(psi, q);
    if !adm.admissible {
        return Err(Error::NotAdmissible(format!(
            "{}: |ψ̂(ξ)|²/ξ behaves like ξ^{:.3} near 0",
            psi.label(),
            adm.low_exponent
        )));
    }
    let signal = psi.scale(adm.value.sqrt().recip());
    let norm = l2_norm(&signal, q);
    Ok(NormalizedWavelet {
        signal,
        norm,
        input_admissibility: adm,
    })
}

/// Unit-norm Gaussian `2^{1/4} e^{−πt²}` time-frequency shifted to `(x, ξ)`:
/// `e^{2πiξt} g(t − x)`.
pub fn shifted_gaussian(x: f64, xi: f64) -> Signal {
    Signal::gaussian().translate(x).modulate(xi)
}
