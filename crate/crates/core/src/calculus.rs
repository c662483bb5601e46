//! Functional calculus along a cut: `f_γ(T) = f(T|ran P_γ) P_γ`, evaluated
//! by two independent routes — compressing T to the range of the projection
//! and running a Dunford integral on the compression ("restrict"), or
//! integrating `f(z)(zI−T)⁻¹` along the cycle itself ("integral") — plus the
//! axiom checks that tie the two together.

use crate::contour::{Curve, Cycle, Region};
use crate::cuts::{plain_spectral_cut, riesz_projection, ProjectionMatrix, ProjectionResult};
use crate::error::{Result, SpectralCutError};
use crate::operators::OperatorModel;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::{linalg, two_pi_i, C64, CMatrix, CVector};
use serde::Serialize;
use std::fmt;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Expression tree over `z`: field operations, integer powers, `exp`,
/// principal `log` and `sqrt`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    fn eval_raw(&self, z: C64, branch_angle: f64) -> Result<C64> {
        Ok(match self {
            Expr::Const(v) => *v,
            Expr::Var => z,
            Expr::Neg(e) => -e.eval_raw(z, branch_angle)?,
            Expr::Add(a, b) => a.eval_raw(z, branch_angle)? + b.eval_raw(z, branch_angle)?,
            Expr::Sub(a, b) => a.eval_raw(z, branch_angle)? - b.eval_raw(z, branch_angle)?,
            Expr::Mul(a, b) => a.eval_raw(z, branch_angle)? * b.eval_raw(z, branch_angle)?,
            Expr::Div(a, b) => {
                let den = b.eval_raw(z, branch_angle)?;
                if den.norm() == 0.0 {
                    return Err(SpectralCutError::EvaluationFailure {
                        z,
                        detail: "division by zero".into(),
                    });
                }
                a.eval_raw(z, branch_angle)? / den
            }
            Expr::Pow(e, k) => {
                let v = e.eval_raw(z, branch_angle)?;
                if *k >= 0 {
                    v.powu(*k as u32)
                } else {
                    if v.norm() == 0.0 {
                        return Err(SpectralCutError::EvaluationFailure {
                            z,
                            detail: "zero to negative power".into(),
                        });
                    }
                    v.powi(*k)
                }
            }
            Expr::Exp(e) => e.eval_raw(z, branch_angle)?.exp(),
            Expr::Log(e) => {
                let v = e.eval_raw(z, branch_angle)?;
                branch_log(v, branch_angle, z)?
            }
            Expr::Sqrt(e) => {
                let v = e.eval_raw(z, branch_angle)?;
                let l = branch_log(v, branch_angle, z)?;
                (l / c(2.0, 0.0)).exp()
            }
        })
    }

    /// Collects arguments of `log`/`sqrt` nodes at a sample point.
    fn branch_arguments(&self, z: C64, branch_angle: f64, out: &mut Vec<C64>) {
        match self {
            Expr::Const(_) | Expr::Var => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) => {
                e.branch_arguments(z, branch_angle, out)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.branch_arguments(z, branch_angle, out);
                b.branch_arguments(z, branch_angle, out);
            }
            Expr::Log(e) | Expr::Sqrt(e) => {
                if let Ok(v) = e.eval_raw(z, branch_angle) {
                    out.push(v);
                }
                e.branch_arguments(z, branch_angle, out);
            }
        }
    }

    /// Polynomial coefficients (ascending) when the expression is a
    /// polynomial in `z`; used for symbolic pole extraction of rational
    /// expressions.
    fn as_polynomial(&self) -> Option<Vec<C64>> {
        fn mul_poly(a: &[C64], b: &[C64]) -> Vec<C64> {
            let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        }
        fn add_poly(a: &[C64], b: &[C64], sign: f64) -> Vec<C64> {
            let n = a.len().max(b.len());
            let mut out = vec![c(0.0, 0.0); n];
            for (i, x) in a.iter().enumerate() {
                out[i] += x;
            }
            for (i, y) in b.iter().enumerate() {
                out[i] += y * c(sign, 0.0);
            }
            out
        }
        match self {
            Expr::Const(v) => Some(vec![*v]),
            Expr::Var => Some(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            Expr::Neg(e) => e.as_polynomial().map(|p| {
                p.into_iter().map(|v| -v).collect()
            }),
            Expr::Add(a, b) => Some(add_poly(&a.as_polynomial()?, &b.as_polynomial()?, 1.0)),
            Expr::Sub(a, b) => Some(add_poly(&a.as_polynomial()?, &b.as_polynomial()?, -1.0)),
            Expr::Mul(a, b) => Some(mul_poly(&a.as_polynomial()?, &b.as_polynomial()?)),
            Expr::Pow(e, k) if *k >= 0 => {
                let base = e.as_polynomial()?;
                let mut out = vec![c(1.0, 0.0)];
                for _ in 0..*k {
                    out = mul_poly(&out, &base);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Denominator polynomials of every division node.
    fn denominators(&self, out: &mut Vec<Vec<C64>>) {
        match self {
            Expr::Const(_) | Expr::Var => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Exp(e) | Expr::Log(e) | Expr::Sqrt(e) => {
                e.denominators(out)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.denominators(out);
                b.denominators(out);
            }
            Expr::Div(a, b) => {
                a.denominators(out);
                b.denominators(out);
                if let Some(p) = b.as_polynomial() {
                    if p.len() > 1 {
                        out.push(p);
                    }
                }
            }
        }
    }
}

/// A holomorphic function as an expression tree with an explicit domain.
#[derive(Debug, Clone)]
pub struct FunctionExpr {
    pub expr: Expr,
    pub domain: Region,
    /// Direction of the branch cut for `log`/`sqrt` (angle of the cut ray
    /// from the origin); π is the principal branch.
    pub branch_angle: f64,
}

fn branch_log(v: C64, branch_angle: f64, z: C64) -> Result<C64> {
    if v.norm() == 0.0 {
        return Err(SpectralCutError::EvaluationFailure {
            z,
            detail: "log of zero".into(),
        });
    }
    // rotate so the cut sits on the negative real axis, take the principal
    // branch, rotate back
    let rot = std::f64::consts::PI - branch_angle;
    let w = v * C64::from_polar(1.0, rot);
    Ok(w.ln() - c(0.0, rot))
}

impl FunctionExpr {
    pub fn new(expr: Expr, domain: Region) -> Result<FunctionExpr> {
        let f = FunctionExpr {
            expr,
            domain,
            branch_angle: std::f64::consts::PI,
        };
        f.validate()?;
        Ok(f)
    }

    /// Parses the CLI infix syntax, e.g. `exp(z)*(z-1)/(z+3)`.
    pub fn parse(src: &str, domain: Region) -> Result<FunctionExpr> {
        let expr = parse_expr(src)?;
        FunctionExpr::new(expr, domain)
    }

    /// The constant function 1 on the given domain.
    pub fn one(domain: Region) -> FunctionExpr {
        FunctionExpr {
            expr: Expr::Const(c(1.0, 0.0)),
            domain,
            branch_angle: std::f64::consts::PI,
        }
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        if !self.domain.contains(z, 1e-12) {
            return Err(SpectralCutError::DomainViolation { z });
        }
        self.expr.eval_raw(z, self.branch_angle)
    }

    /// Evaluation without the domain-membership test (Dunford contours on
    /// compressions may run slightly outside the declared region).
    pub fn eval_unchecked(&self, z: C64) -> Result<C64> {
        self.expr.eval_raw(z, self.branch_angle)
    }

    /// Checks that poles of rational sub-expressions and branch cuts of
    /// `log`/`sqrt` stay outside the domain, on a 10⁴-point sample of the
    /// domain's bounding box plus boundary samples of every shape.
    pub fn validate(&self) -> Result<()> {
        // symbolic pole extraction for rational expressions
        let mut dens: Vec<Vec<C64>> = Vec::new();
        self.expr.denominators(&mut dens);
        for den in dens {
            for root in polynomial_roots(&den)? {
                if self.domain.contains(root, 1e-9) {
                    return Err(SpectralCutError::DomainTooSmall {
                        detail: format!("pole at {root} lies inside the declared domain"),
                    });
                }
            }
        }
        // sampled branch-cut check
        let Some(bb) = self.domain.bounding_box() else {
            return Err(SpectralCutError::DomainTooSmall {
                detail: "empty domain".into(),
            });
        };
        let mut samples = Vec::with_capacity(10_000 + 1024);
        let side = 100;
        for i in 0..side {
            for j in 0..side {
                let p = c(
                    bb.x0 + bb.width() * (i as f64 + 0.5) / side as f64,
                    bb.y0 + bb.height() * (j as f64 + 0.5) / side as f64,
                );
                if self.domain.contains(p, 0.0) {
                    samples.push(p);
                }
            }
        }
        for shape in &self.domain.shapes {
            samples.extend(shape.boundary_samples(256));
        }
        let cut_dir = C64::from_polar(1.0, self.branch_angle);
        for p in samples {
            let mut args = Vec::new();
            self.expr.branch_arguments(p, self.branch_angle, &mut args);
            for a in args {
                // distance from the argument to the cut ray
                let t = (a.re * cut_dir.re + a.im * cut_dir.im).max(0.0);
                let foot = cut_dir * c(t, 0.0);
                let d = (a - foot).norm();
                if d <= 1e-9 * a.norm().max(1.0) && t >= 0.0 {
                    return Err(SpectralCutError::DomainTooSmall {
                        detail: format!(
                            "branch cut crosses the domain: argument {a} at sample {p}"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Roots of a polynomial given by ascending coefficients, through the
/// companion matrix.
fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let mut co = coeffs.to_vec();
    while co.last().is_some_and(|v| v.norm() < 1e-300) {
        co.pop();
    }
    if co.len() <= 1 {
        return Ok(Vec::new());
    }
    let n = co.len() - 1;
    let lead = co[n];
    let mut m = CMatrix::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -co[i] / lead;
    }
    linalg::eigenvalues(&m)
}

// --- parser ---------------------------------------------------------------

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
}

fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser {
        chars: src.chars().peekable(),
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.chars.peek().is_some() {
        return Err(SpectralCutError::ExprParse(format!(
            "unexpected trailing input in '{src}'"
        )));
    }
    Ok(e)
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.peek().is_some_and(|c| c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some('+') => {
                    self.chars.next();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some('-') => {
                    self.chars.next();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some('*') => {
                    self.chars.next();
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some('/') => {
                    self.chars.next();
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.chars.peek() == Some(&'-') {
            self.chars.next();
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        let base = self.atom()?;
        self.skip_ws();
        if self.chars.peek() == Some(&'^') {
            self.chars.next();
            self.skip_ws();
            let mut digits = String::new();
            if self.chars.peek() == Some(&'-') {
                digits.push('-');
                self.chars.next();
            }
            while self.chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                digits.push(self.chars.next().unwrap());
            }
            let k: i32 = digits
                .parse()
                .map_err(|_| SpectralCutError::ExprParse("integer exponent expected after ^".into()))?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.chars.peek() {
            Some('(') => {
                self.chars.next();
                let e = self.expr()?;
                self.skip_ws();
                if self.chars.next() != Some(')') {
                    return Err(SpectralCutError::ExprParse("expected ')'".into()));
                }
                Ok(e)
            }
            Some(ch) if ch.is_ascii_digit() || *ch == '.' => {
                let mut lit = String::new();
                while self
                    .chars
                    .peek()
                    .is_some_and(|c| c.is_ascii_digit() || *c == '.' || *c == 'e' || *c == 'E')
                {
                    let ch = self.chars.next().unwrap();
                    lit.push(ch);
                    if ch == 'e' || ch == 'E' {
                        if let Some(&s) = self.chars.peek() {
                            if s == '+' || s == '-' {
                                lit.push(self.chars.next().unwrap());
                            }
                        }
                    }
                }
                let v: f64 = lit
                    .parse()
                    .map_err(|_| SpectralCutError::ExprParse(format!("bad number '{lit}'")))?;
                // imaginary literal like 2i
                if self.chars.peek() == Some(&'i') {
                    self.chars.next();
                    return Ok(Expr::Const(c(0.0, v)));
                }
                Ok(Expr::Const(c(v, 0.0)))
            }
            Some(ch) if ch.is_ascii_alphabetic() => {
                let mut name = String::new();
                while self.chars.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    name.push(self.chars.next().unwrap());
                }
                match name.as_str() {
                    "z" => Ok(Expr::Var),
                    "i" => Ok(Expr::Const(c(0.0, 1.0))),
                    "pi" => Ok(Expr::Const(c(std::f64::consts::PI, 0.0))),
                    "exp" | "log" | "sqrt" => {
                        self.skip_ws();
                        if self.chars.next() != Some('(') {
                            return Err(SpectralCutError::ExprParse(format!(
                                "expected '(' after {name}"
                            )));
                        }
                        let arg = self.expr()?;
                        self.skip_ws();
                        if self.chars.next() != Some(')') {
                            return Err(SpectralCutError::ExprParse("expected ')'".into()));
                        }
                        Ok(match name.as_str() {
                            "exp" => Expr::Exp(Box::new(arg)),
                            "log" => Expr::Log(Box::new(arg)),
                            _ => Expr::Sqrt(Box::new(arg)),
                        })
                    }
                    other => Err(SpectralCutError::ExprParse(format!(
                        "unknown identifier '{other}'"
                    ))),
                }
            }
            other => Err(SpectralCutError::ExprParse(format!(
                "unexpected character {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "({}+{}i)", v.re, v.im),
            Expr::Var => write!(f, "z"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(e, k) => write!(f, "({e}^{k})"),
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Log(e) => write!(f, "log({e})"),
            Expr::Sqrt(e) => write!(f, "sqrt({e})"),
        }
    }
}

// --- the two calculus routes ----------------------------------------------

/// Which route produced a calculus result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CalculusRoute {
    Restrict,
    Integral,
}

/// `f_γ(T)` with diagnostics.
#[derive(Debug, Clone)]
pub struct CalculusResult {
    pub matrix: ProjectionMatrix,
    pub route: CalculusRoute,
    /// ‖(I − P) F‖ / ‖F‖.
    pub range_residual: f64,
    /// ‖F_integral − F_restrict‖ when both routes ran.
    pub agreement_with_other_route: Option<f64>,
}

/// Evaluates `f` on a compressed block by a Dunford integral over a circle
/// of radius 1.25× the block's spectral radius around its eigenvalue
/// centroid. The circle must stay inside the function's domain.
fn dunford_on_block(
    t_hat: &CMatrix,
    f: &FunctionExpr,
    cfg: &QuadratureConfig,
) -> Result<CMatrix> {
    let k = t_hat.nrows();
    if k == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let eigs = linalg::eigenvalues(t_hat)?;
    for e in &eigs {
        if !f.domain.contains(*e, 1e-9) {
            return Err(SpectralCutError::DomainTooSmall {
                detail: format!("eigenvalue {e} of the compression escapes the domain"),
            });
        }
    }
    let centroid = eigs.iter().sum::<C64>() / c(k as f64, 0.0);
    let spread = eigs
        .iter()
        .map(|e| (e - centroid).norm())
        .fold(0.0, f64::max);
    let radius = (1.25 * spread).max(1e-6 * linalg::scale_of(t_hat));
    let circle = Cycle::single(Curve::circle(centroid, radius, true));
    // the contour itself must stay in the domain
    for i in 0..256 {
        let th = std::f64::consts::TAU * i as f64 / 256.0;
        let zc = centroid + C64::from_polar(radius, th);
        if !f.domain.contains(zc, 1e-12) {
            return Err(SpectralCutError::DomainTooSmall {
                detail: format!("Dunford circle leaves the domain at {zc}"),
            });
        }
    }
    let block = OperatorModel::dense(t_hat.clone());
    let r = integrate(
        |z| {
            let fz = f.eval_unchecked(z)?;
            let fac = block.resolvent_factor(z).map_err(|e| match e {
                SpectralCutError::SingularResolvent { z, .. } => SpectralCutError::EvaluationFailure {
                    z,
                    detail: "resolvent singular on Dunford circle".into(),
                },
                other => other,
            })?;
            let mut m = fac.solve_identity(k);
            m.iter_mut().for_each(|v| *v *= fz);
            Ok(m)
        },
        &circle,
        cfg,
    )?;
    let mut fm = r.value;
    let tpi = two_pi_i();
    fm.iter_mut().for_each(|v| *v /= tpi);
    Ok(fm)
}

fn range_residual(p: &ProjectionMatrix, fm: &ProjectionMatrix) -> f64 {
    let fnorm = fm.norm();
    if fnorm == 0.0 {
        return 0.0;
    }
    match (p, fm) {
        (ProjectionMatrix::Diagonal(pd), ProjectionMatrix::Diagonal(fd)) => {
            (0..pd.len())
                .map(|i| ((c(1.0, 0.0) - pd[i]) * fd[i]).norm())
                .fold(0.0, f64::max)
                / fnorm
        }
        _ => {
            let pm = p.to_dense();
            let f = fm.to_dense();
            let n = pm.nrows();
            linalg::operator_norm(&((linalg::identity(n) - pm) * f)) / fnorm
        }
    }
}

/// Restrict route: compresses T to a basis of `ran P`, evaluates `f` on the
/// compression by a Dunford integral, and lifts back:
/// `F = B f(T̂) B⁺ P`.
pub fn calculus_restrict(
    op: &OperatorModel,
    projection: &ProjectionResult,
    f: &FunctionExpr,
    cfg: &QuadratureConfig,
) -> Result<CalculusResult> {
    let matrix = match (&projection.matrix, op.diagonal_entries()) {
        (ProjectionMatrix::Diagonal(d), Some(entries)) => {
            // diagonal models restrict to multiplication by f on the
            // retained entries
            let mut out = CVector::zeros(d.len());
            for i in 0..d.len() {
                if d[i].norm() > 0.5 {
                    if !f.domain.contains(entries[i], 1e-9) {
                        return Err(SpectralCutError::DomainTooSmall {
                            detail: format!("eigenvalue {} escapes the domain", entries[i]),
                        });
                    }
                    out[i] = f.eval_unchecked(entries[i])? * d[i];
                }
            }
            ProjectionMatrix::Diagonal(out)
        }
        _ => {
            let p = projection.matrix.to_dense();
            let b = linalg::range_basis(&p, 1e-8);
            let t = op.to_dense();
            let t_hat = b.adjoint() * &t * &b;
            let f_hat = dunford_on_block(&t_hat, f, cfg)?;
            ProjectionMatrix::Dense(&b * f_hat * b.adjoint() * &p)
        }
    };
    let range_residual = range_residual(&projection.matrix, &matrix);
    Ok(CalculusResult {
        matrix,
        route: CalculusRoute::Restrict,
        range_residual,
        agreement_with_other_route: None,
    })
}

/// Integral route: `F = (1/2πi) ∮ f(z)(zI−T)⁻¹ dz` columnwise along the
/// cycle, with the same graded treatment of touching points as the
/// projection itself.
pub fn calculus_integral(
    op: &OperatorModel,
    cycle: &Cycle,
    f: &FunctionExpr,
    cfg: &QuadratureConfig,
) -> Result<CalculusResult> {
    // reuse the projection preconditions (eigenvalues off the cycle, probe
    // at touching points, graded radii)
    let projection = plain_spectral_cut(op, cycle, cfg)?;
    let tpi = two_pi_i();
    let matrix = match op.diagonal_entries() {
        Some(entries) => {
            let lambda: Vec<C64> = entries.to_vec();
            let r = integrate(
                move |z| {
                    let fz = f.eval(z)?;
                    Ok(CVector::from_fn(lambda.len(), |i, _| {
                        fz / (z - lambda[i])
                    }))
                },
                cycle,
                cfg,
            )?;
            ProjectionMatrix::Diagonal(r.value / tpi)
        }
        None => {
            let n = op.dim();
            let r = integrate(
                |z| {
                    let fz = f.eval(z)?;
                    let fac = op.resolvent_factor(z)?;
                    let mut m = fac.solve_identity(n);
                    m.iter_mut().for_each(|v| *v *= fz);
                    Ok(m)
                },
                cycle,
                cfg,
            )?;
            let mut m = r.value;
            m.iter_mut().for_each(|v| *v /= tpi);
            ProjectionMatrix::Dense(m)
        }
    };
    let range_residual = range_residual(&projection.matrix, &matrix);
    Ok(CalculusResult {
        matrix,
        route: CalculusRoute::Integral,
        range_residual,
        agreement_with_other_route: None,
    })
}

/// Runs both routes and records their distance.
pub fn calculus_both(
    op: &OperatorModel,
    cycle: &Cycle,
    f: &FunctionExpr,
    cfg: &QuadratureConfig,
) -> Result<(CalculusResult, CalculusResult)> {
    let projection = plain_spectral_cut(op, cycle, cfg)?;
    let restrict = calculus_restrict(op, &projection, f, cfg)?;
    let mut integral = calculus_integral(op, cycle, f, cfg)?;
    let agreement = restrict.matrix.distance(&integral.matrix);
    integral.agreement_with_other_route = Some(agreement);
    Ok((restrict, integral))
}

/// One axiom check.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

/// Report of the six calculus axioms.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
    pub all_pass: bool,
}

impl AxiomReport {
    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Verifies the calculus axiom list for `f` and `g` on a common domain:
/// identity, additivity, multiplicativity, spectral mapping, continuity of
/// Taylor truncations of `exp`, and curve equivalence.
pub fn check_calculus_axioms(
    op: &OperatorModel,
    cycle: &Cycle,
    f: &FunctionExpr,
    g: &FunctionExpr,
    cfg: &QuadratureConfig,
) -> Result<AxiomReport> {
    let mut checks = Vec::new();
    let projection = plain_spectral_cut(op, cycle, cfg)?;
    let n = op.dim();

    // (i) identity: 1_γ(T) = P_γ
    let one = FunctionExpr::one(f.domain.clone());
    let f_one = calculus_restrict(op, &projection, &one, cfg)?;
    let m_ident = f_one.matrix.distance(&projection.matrix);
    checks.push(AxiomCheck {
        name: "identity".into(),
        pass: m_ident <= 1e-8,
        measured: m_ident,
        threshold: 1e-8,
        detail: "1_γ(T) = P_γ".into(),
    });

    let ff = calculus_restrict(op, &projection, f, cfg)?;
    let gg = calculus_restrict(op, &projection, g, cfg)?;

    // (ii) additivity
    let sum_expr = FunctionExpr {
        expr: Expr::Add(Box::new(f.expr.clone()), Box::new(g.expr.clone())),
        domain: f.domain.clone(),
        branch_angle: f.branch_angle,
    };
    let fs = calculus_restrict(op, &projection, &sum_expr, cfg)?;
    let m_add = fs.matrix.distance(&ff.matrix.add(&gg.matrix));
    checks.push(AxiomCheck {
        name: "additivity".into(),
        pass: m_add <= 1e-8,
        measured: m_add,
        threshold: 1e-8,
        detail: "(f+g)_γ = f_γ + g_γ".into(),
    });

    // (iii) multiplicativity
    let prod_expr = FunctionExpr {
        expr: Expr::Mul(Box::new(f.expr.clone()), Box::new(g.expr.clone())),
        domain: f.domain.clone(),
        branch_angle: f.branch_angle,
    };
    let fp = calculus_restrict(op, &projection, &prod_expr, cfg)?;
    let m_mul = fp.matrix.distance(&ff.matrix.mul(&gg.matrix));
    checks.push(AxiomCheck {
        name: "multiplicativity".into(),
        pass: m_mul <= 1e-8,
        measured: m_mul,
        threshold: 1e-8,
        detail: "(fg)_γ = f_γ g_γ".into(),
    });

    // (iv) spectral mapping: σ(f_γ(T)) = f(interior spectrum) ∪ {0}
    let f_eigs = match &ff.matrix {
        ProjectionMatrix::Diagonal(d) => d.iter().copied().collect::<Vec<C64>>(),
        ProjectionMatrix::Dense(m) => linalg::eigenvalues(m)?,
    };
    let mut expected: Vec<C64> = projection
        .diagnostics
        .interior_spectrum
        .iter()
        .map(|e| f.eval_unchecked(*e))
        .collect::<Result<_>>()?;
    if projection.diagnostics.rank < n {
        expected.push(c(0.0, 0.0));
    }
    let m_map = linalg::hausdorff(&f_eigs, &expected);
    checks.push(AxiomCheck {
        name: "spectral_mapping".into(),
        pass: m_map <= 1e-6,
        measured: m_map,
        threshold: 1e-6,
        detail: "σ(f_γ(T)) = f(σ(T|ran P)) ∪ {0}".into(),
    });

    // (v) continuity on Taylor truncations of exp
    let exp_expr = FunctionExpr {
        expr: Expr::Exp(Box::new(Expr::Var)),
        domain: f.domain.clone(),
        branch_angle: f.branch_angle,
    };
    let target = calculus_restrict(op, &projection, &exp_expr, cfg)?;
    let rho = projection
        .diagnostics
        .interior_spectrum
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max);
    let d_start = (2.0 * rho).ceil() as usize;
    let mut errors = Vec::new();
    for extra in 0..6 {
        let degree = d_start + extra;
        // Horner form of the degree-d Taylor polynomial of exp
        let mut poly = Expr::Const(c(1.0 / factorial(degree), 0.0));
        for k in (0..degree).rev() {
            poly = Expr::Add(
                Box::new(Expr::Const(c(1.0 / factorial(k), 0.0))),
                Box::new(Expr::Mul(Box::new(Expr::Var), Box::new(poly))),
            );
        }
        let fe = FunctionExpr {
            expr: poly,
            domain: f.domain.clone(),
            branch_angle: f.branch_angle,
        };
        let fd = calculus_restrict(op, &projection, &fe, cfg)?;
        errors.push(fd.matrix.distance(&target.matrix));
    }
    let halving = errors
        .windows(2)
        .all(|w| w[1] <= 0.5 * w[0] + 1e-12);
    let m_cont = errors.last().copied().unwrap_or(f64::INFINITY);
    checks.push(AxiomCheck {
        name: "continuity".into(),
        pass: halving,
        measured: m_cont,
        threshold: 0.5,
        detail: format!("Taylor errors of exp beyond degree {d_start}: {errors:?}"),
    });

    // (vi) curve equivalence: small circles around the enclosed eigenvalue
    // clusters enclose the same spectrum, so the calculus must agree
    let equivalent = equivalent_cycle(op, cycle)?;
    let m_equiv = match equivalent {
        Some(cycle2) => {
            let p2 = riesz_projection(op, &cycle2, cfg)?;
            let f2 = calculus_restrict(op, &p2, f, cfg)?;
            f2.matrix.distance(&ff.matrix)
        }
        None => 0.0,
    };
    checks.push(AxiomCheck {
        name: "curve_equivalence".into(),
        pass: m_equiv <= 1e-8,
        measured: m_equiv,
        threshold: 1e-8,
        detail: "f_γ(T) = f_γ̃(T) for a cycle enclosing the same eigenvalues".into(),
    });

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(AxiomReport { checks, all_pass })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Builds a cycle of small circles around the eigenvalue clusters enclosed
/// by `cycle`; returns `None` when the geometry leaves no room.
fn equivalent_cycle(op: &OperatorModel, cycle: &Cycle) -> Result<Option<Cycle>> {
    let spectrum = op.spectrum()?;
    let inside: Vec<C64> = spectrum
        .eigenvalues
        .iter()
        .copied()
        .filter(|e| cycle.winding_unchecked(*e) == 1)
        .collect();
    let outside: Vec<C64> = spectrum
        .eigenvalues
        .iter()
        .copied()
        .filter(|e| cycle.winding_unchecked(*e) == 0)
        .collect();
    if inside.is_empty() {
        return Ok(None);
    }
    // greedy clustering, then merge until the discs are pairwise disjoint
    let mut clusters: Vec<(C64, f64)> = inside.iter().map(|e| (*e, 0.0)).collect();
    loop {
        let mut merged = false;
        'outer: for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let (ci, ri) = clusters[i];
                let (cj, rj) = clusters[j];
                let d = (ci - cj).norm();
                if d <= (ri + rj) * 3.0 + 1e-12 {
                    // merge j into i
                    let w = (ci + cj) / c(2.0, 0.0);
                    let r = (d / 2.0 + ri.max(rj)).max(1e-6);
                    clusters[i] = (w, r);
                    clusters.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    let mut curves = Vec::new();
    for (center, r0) in &clusters {
        // radius limited by exterior eigenvalues and the cycle itself
        let mut limit = cycle.distance_to_point(*center);
        for e in &outside {
            limit = limit.min((e - center).norm());
        }
        // must still contain its own cluster members
        let need = inside
            .iter()
            .filter(|e| (*e - center).norm() <= r0 * 1.5 + 1e-9)
            .map(|e| (e - center).norm())
            .fold(0.0, f64::max);
        let radius = (need + (limit - need) * 0.5).max(need * 1.2 + 1e-9);
        if radius >= limit || !radius.is_finite() {
            return Ok(None);
        }
        curves.push(Curve::circle(*center, radius, true));
    }
    match crate::contour::make_admissible(curves) {
        Ok(cyc) => {
            // accept only if the enclosed eigenvalue set is identical
            let same = spectrum.eigenvalues.iter().all(|e| {
                let w1 = cycle.winding_unchecked(*e);
                let w2 = cyc.winding_unchecked(*e);
                w1 == w2
            });
            Ok(same.then_some(cyc))
        }
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::RegionShape;

    fn diag(vals: &[(f64, f64)]) -> OperatorModel {
        OperatorModel::diagonal(vals.iter().map(|&(re, im)| c(re, im)).collect())
    }

    fn unit_circle() -> Cycle {
        Cycle::single(Curve::circle(c(0.0, 0.0), 1.0, true))
    }

    fn big_domain() -> Region {
        Region::new(vec![RegionShape::rect(-10.0, 10.0, -10.0, 10.0)])
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn parser_handles_infix_and_functions() {
        let f = FunctionExpr::parse("exp(z)*(z-1)/(z+3)", big_domain());
        // pole at −3 is inside the declared domain: must be rejected
        assert!(matches!(f, Err(SpectralCutError::DomainTooSmall { .. })));
        let dom = Region::new(vec![RegionShape::disc(c(0.0, 0.0), 2.0)]);
        let f = FunctionExpr::parse("exp(z)*(z-1)/(z+3)", dom).unwrap();
        let v = f.eval(c(1.0, 0.0)).unwrap();
        assert!(v.norm() < 1e-12);
        let v = f.eval(c(0.0, 0.0)).unwrap();
        let expect = c(-1.0 / 3.0, 0.0);
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(FunctionExpr::parse("z +* 2", big_domain()).is_err());
        assert!(FunctionExpr::parse("foo(z)", big_domain()).is_err());
        assert!(FunctionExpr::parse("z^z", big_domain()).is_err());
    }

    #[test]
    fn constant_function_reproduces_projection() {
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let p = riesz_projection(&t, &unit_circle(), &cfg()).unwrap();
        let one = FunctionExpr::one(big_domain());
        let r = calculus_restrict(&t, &p, &one, &cfg()).unwrap();
        assert!(r.matrix.distance(&p.matrix) < 1e-12);
        let ri = calculus_integral(&t, &unit_circle(), &one, &cfg()).unwrap();
        assert!(ri.matrix.distance(&p.matrix) < 1e-8);
    }

    #[test]
    fn identity_function_on_diagonal() {
        // f = z on Diagonal(0,2), unit circle: enclosed eigenvalue is 0, so
        // f_γ(T) = 0·P = 0
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let p = riesz_projection(&t, &unit_circle(), &cfg()).unwrap();
        let f = FunctionExpr::parse("z", big_domain()).unwrap();
        let r = calculus_restrict(&t, &p, &f, &cfg()).unwrap();
        assert!(r.matrix.norm() < 1e-10);
    }

    #[test]
    fn polynomial_with_global_domain_equals_p_of_t_times_projection() {
        // f polynomial with domain ⊇ σ(T): f_γ(T) = f(T) P_γ
        let t = OperatorModel::dense(CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        ));
        let circle1 = Cycle::single(Curve::circle(c(1.0, 0.0), 0.9, true));
        let p = riesz_projection(&t, &circle1, &cfg()).unwrap();
        let f = FunctionExpr::parse("z^2 - 2*z + 1", big_domain()).unwrap();
        let r = calculus_restrict(&t, &p, &f, &cfg()).unwrap();
        // dense evaluation of p(T)·P
        let td = t.to_dense();
        let pt = &td * &td - &td * c(2.0, 0.0) + linalg::identity(2);
        let expect = pt * p.matrix.to_dense();
        let err = linalg::operator_norm(&(r.matrix.to_dense() - expect));
        assert!(err < 1e-8, "f(T)P mismatch {err}");
    }

    #[test]
    fn integral_route_z_squared_on_three_eigenvalues() {
        // f = z² on Diagonal(0,2,5), circle enclosing {0,2} → diag(0,4,0)
        let t = diag(&[(0.0, 0.0), (2.0, 0.0), (5.0, 0.0)]);
        let cyc = Cycle::single(Curve::circle(c(1.0, 0.0), 2.0, true));
        let f = FunctionExpr::parse("z^2", big_domain()).unwrap();
        let r = calculus_integral(&t, &cyc, &f, &cfg()).unwrap();
        match &r.matrix {
            ProjectionMatrix::Diagonal(d) => {
                assert!(d[0].norm() < 1e-9);
                assert!((d[1] - c(4.0, 0.0)).norm() < 1e-9);
                assert!(d[2].norm() < 1e-9);
            }
            _ => panic!("diagonal expected"),
        }
    }

    #[test]
    fn routes_agree_on_dense_model() {
        let t = OperatorModel::dense(CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        ));
        let circle1 = Cycle::single(Curve::circle(c(1.0, 0.0), 0.9, true));
        let f = FunctionExpr::parse("exp(z)", big_domain()).unwrap();
        let (rr, ri) = calculus_both(&t, &circle1, &f, &cfg()).unwrap();
        let agreement = ri.agreement_with_other_route.unwrap();
        assert!(agreement < 1e-7, "route agreement {agreement}");
        assert!(rr.range_residual < 1e-7);
        assert!(ri.range_residual < 1e-7);
    }

    #[test]
    fn axioms_hold_on_dense_fixture() {
        let t = OperatorModel::dense(CMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        ));
        let circle1 = Cycle::single(Curve::circle(c(1.0, 0.0), 0.9, true));
        let f = FunctionExpr::parse("exp(z)", big_domain()).unwrap();
        let g = FunctionExpr::parse("z^2+1", big_domain()).unwrap();
        let rep = check_calculus_axioms(&t, &circle1, &f, &g, &cfg()).unwrap();
        assert!(rep.all_pass, "axiom checks: {:#?}", rep.checks);
        // spectral mapping detail: eig(exp_γ) = {e, 0}
        let p = riesz_projection(&t, &circle1, &cfg()).unwrap();
        let fe = calculus_restrict(&t, &p, &f, &cfg()).unwrap();
        let eigs = linalg::eigenvalues(&fe.matrix.to_dense()).unwrap();
        let expect = vec![c(std::f64::consts::E, 0.0), c(0.0, 0.0)];
        assert!(linalg::hausdorff(&eigs, &expect) < 1e-8);
    }

    #[test]
    fn multiplicativity_z_times_z() {
        let t = diag(&[(0.3, 0.0), (2.0, 0.0)]);
        let f = FunctionExpr::parse("z", big_domain()).unwrap();
        let g = FunctionExpr::parse("z", big_domain()).unwrap();
        let rep = check_calculus_axioms(&t, &unit_circle(), &f, &g, &cfg()).unwrap();
        assert!(rep.check("multiplicativity").unwrap().pass);
        assert!(rep.check("identity").unwrap().pass);
    }

    #[test]
    fn homomorphism_on_random_polynomials() {
        // random degree ≤ 5 polynomials with coefficients in the unit disc
        let t = OperatorModel::dense(CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.5, 0.1),
                c(0.2, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(2.0, 0.3),
                c(0.1, 0.1),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(2.3, -0.2),
            ],
        ));
        let cyc = Cycle::single(Curve::circle(c(2.1, 0.0), 0.8, true));
        let p = riesz_projection(&t, &cyc, &cfg()).unwrap();
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        let bound = 1e-7 * (1.0 + t.norm_2()).powi(10);
        for _ in 0..5 {
            let coeffs_p: Vec<C64> = (0..=5).map(|_| c(next(), next())).collect();
            let coeffs_q: Vec<C64> = (0..=5).map(|_| c(next(), next())).collect();
            let poly = |cs: &[C64]| -> Expr {
                let mut e = Expr::Const(cs[cs.len() - 1]);
                for k in (0..cs.len() - 1).rev() {
                    e = Expr::Add(
                        Box::new(Expr::Const(cs[k])),
                        Box::new(Expr::Mul(Box::new(Expr::Var), Box::new(e))),
                    );
                }
                e
            };
            let fp = FunctionExpr {
                expr: poly(&coeffs_p),
                domain: big_domain(),
                branch_angle: std::f64::consts::PI,
            };
            let fq = FunctionExpr {
                expr: poly(&coeffs_q),
                domain: big_domain(),
                branch_angle: std::f64::consts::PI,
            };
            let fpq = FunctionExpr {
                expr: Expr::Mul(Box::new(fp.expr.clone()), Box::new(fq.expr.clone())),
                domain: big_domain(),
                branch_angle: std::f64::consts::PI,
            };
            let rp = calculus_restrict(&t, &p, &fp, &cfg()).unwrap();
            let rq = calculus_restrict(&t, &p, &fq, &cfg()).unwrap();
            let rpq = calculus_restrict(&t, &p, &fpq, &cfg()).unwrap();
            let defect = rpq.matrix.distance(&rp.matrix.mul(&rq.matrix));
            assert!(defect <= bound, "homomorphism defect {defect} > {bound}");
        }
    }

    #[test]
    fn domain_too_small_names_the_escaping_eigenvalue() {
        let t = diag(&[(0.0, 0.0), (2.0, 0.0)]);
        let p = riesz_projection(&t, &unit_circle(), &cfg()).unwrap();
        let tiny = Region::new(vec![RegionShape::disc(c(5.0, 0.0), 0.1)]);
        let f = FunctionExpr {
            expr: Expr::Var,
            domain: tiny,
            branch_angle: std::f64::consts::PI,
        };
        match calculus_restrict(&t, &p, &f, &cfg()) {
            Err(SpectralCutError::DomainTooSmall { detail }) => {
                assert!(detail.contains("0"), "detail: {detail}");
            }
            other => panic!("expected DomainTooSmall, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn log_branch_validation() {
        // log(z) with a domain crossing the negative real axis is rejected
        let dom = Region::new(vec![RegionShape::rect(-2.0, -0.5, -0.5, 0.5)]);
        assert!(matches!(
            FunctionExpr::parse("log(z)", dom),
            Err(SpectralCutError::DomainTooSmall { .. })
        ));
        // away from the cut it evaluates to the principal branch
        let dom = Region::new(vec![RegionShape::disc(c(2.0, 0.0), 1.0)]);
        let f = FunctionExpr::parse("log(z)", dom).unwrap();
        let v = f.eval(c(std::f64::consts::E, 0.0)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-12);
    }
}
