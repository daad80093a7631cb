//! Uniform 2-D grids, sampled fields, and the centered-difference calculus
//! on them.
//!
//! Field files are plain text: a header line "nx ny h ox oy role" followed
//! by one node record per line, "i j v1 v2" for vector and complex roles or
//! "i j s" for scalars, row-major (j outer, i inner).

use num_complex::Complex64;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Geometry of a uniform node-centered grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub origin: Vec2,
    /// Grid spacing, equal in both directions.
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Cells excluded from interior statistics.
    pub boundary_margin: usize,
}

impl GridSpec {
    pub fn new(origin: Vec2, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::GridTooSmall(format!("need nx, ny >= 8, got {nx} x {ny}")));
        }
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::GridTooSmall(format!("need h > 0, got {h}")));
        }
        Ok(GridSpec {
            origin,
            h,
            nx,
            ny,
            boundary_margin: 1,
        })
    }

    /// Square grid over [0, 1]^2 with n nodes per side.
    pub fn unit(n: usize) -> Result<Self> {
        GridSpec::new(Vec2::ZERO, 1.0 / (n as f64 - 1.0), n, n)
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.h, j as f64 * self.h)
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self) -> Vec2 {
        self.origin + Vec2::new((self.nx - 1) as f64, (self.ny - 1) as f64) * (0.5 * self.h)
    }

    /// Spec shrunk by `cells` on every side; origin moves accordingly.
    pub fn shrink(&self, cells: usize) -> Result<GridSpec> {
        if self.nx <= 2 * cells || self.ny <= 2 * cells {
            return Err(Error::GridTooSmall(format!(
                "cannot shrink {}x{} grid by {cells} cells per side",
                self.nx, self.ny
            )));
        }
        Ok(GridSpec {
            origin: self.node(cells, cells),
            h: self.h,
            nx: self.nx - 2 * cells,
            ny: self.ny - 2 * cells,
            boundary_margin: self.boundary_margin,
        })
    }

    fn same_geometry(&self, other: &GridSpec) -> bool {
        (self.h - other.h).abs() < 1e-13
            && self.nx == other.nx
            && self.ny == other.ny
            && (self.origin - other.origin).norm() < 1e-12
    }
}

/// Node values sampled over a grid.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    pub spec: GridSpec,
    values: Vec<T>,
}

pub type ScalarField = Grid<f64>;
pub type VectorField = Grid<Vec2>;
pub type ComplexField = Grid<Complex64>;

impl<T: Copy + Default> Grid<T> {
    pub fn fill(spec: GridSpec, value: T) -> Self {
        Grid {
            spec,
            values: vec![value; spec.len()],
        }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Vec2) -> T) -> Self {
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                values.push(f(spec.node(i, j)));
            }
        }
        Grid { spec, values }
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.spec.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let idx = self.spec.idx(i, j);
        self.values[idx] = v;
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Iterate interior nodes (one-cell margin unless a deeper margin is given).
    pub fn interior(&self, margin: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = margin.max(1);
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        (m..ny.saturating_sub(m)).flat_map(move |j| (m..nx.saturating_sub(m)).map(move |i| (i, j)))
    }

    /// Restriction to the sub-grid shrunk by `cells` per side.
    pub fn restrict(&self, cells: usize) -> Result<Grid<T>> {
        let spec = self.spec.shrink(cells)?;
        let mut values = Vec::with_capacity(spec.len());
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                values.push(self.at(i + cells, j + cells));
            }
        }
        Ok(Grid { spec, values })
    }
}

impl VectorField {
    /// Max over nodes of | |m| - 1 |, skipping an optional exclusion test.
    pub fn unit_norm_defect(&self, exclude: impl Fn(usize, usize) -> bool) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                if exclude(i, j) {
                    continue;
                }
                worst = worst.max((self.at(i, j).norm() - 1.0).abs());
            }
        }
        worst
    }

    pub fn ensure_unit(&self, tol: f64) -> Result<()> {
        let defect = self.unit_norm_defect(|_, _| false);
        if defect > tol {
            return Err(Error::NotUnitNorm(defect));
        }
        Ok(())
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Centered-difference divergence, defined on the grid shrunk by one cell.
    pub fn divergence(&self) -> Result<ScalarField> {
        let spec = self.spec.shrink(1)?;
        let inv2h = 0.5 / self.spec.h;
        let mut out = ScalarField::fill(spec, 0.0);
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let (si, sj) = (i + 1, j + 1);
                let div = (self.at(si + 1, sj).x - self.at(si - 1, sj).x) * inv2h
                    + (self.at(si, sj + 1).y - self.at(si, sj - 1).y) * inv2h;
                out.set(i, j, div);
            }
        }
        Ok(out)
    }

    /// Componentwise map through a plane-to-plane function.
    pub fn map_values(&self, f: impl Fn(Vec2) -> Vec2) -> VectorField {
        Grid {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl ScalarField {
    /// Centered gradient, defined on the grid shrunk by one cell.
    pub fn gradient(&self) -> Result<VectorField> {
        let spec = self.spec.shrink(1)?;
        let inv2h = 0.5 / self.spec.h;
        let mut out = VectorField::fill(spec, Vec2::ZERO);
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let (si, sj) = (i + 1, j + 1);
                let g = Vec2::new(
                    (self.at(si + 1, sj) - self.at(si - 1, sj)) * inv2h,
                    (self.at(si, sj + 1) - self.at(si, sj - 1)) * inv2h,
                );
                out.set(i, j, g);
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Discrete L^p norm over the whole grid with weight h^2.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let h2 = self.spec.h * self.spec.h;
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (sum * h2).powf(1.0 / p)
    }
}

/// Pointwise difference of two fields on the same geometry.
pub fn max_difference(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    if !a.spec.same_geometry(&b.spec) {
        return Err(Error::GridTooSmall("geometry mismatch in field comparison".into()));
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Scalar,
    Vector,
    Complex,
}

impl Role {
    fn as_str(self) -> &'static str {
        match self {
            Role::Scalar => "scalar",
            Role::Vector => "vector",
            Role::Complex => "complex",
        }
    }
}

fn write_header<W: Write>(w: &mut W, spec: &GridSpec, role: Role) -> std::io::Result<()> {
    writeln!(
        w,
        "{} {} {:.17e} {:.17e} {:.17e} {}",
        spec.nx,
        spec.ny,
        spec.h,
        spec.origin.x,
        spec.origin.y,
        role.as_str()
    )
}

pub fn write_vector_field<W: Write>(w: &mut W, field: &VectorField) -> std::io::Result<()> {
    write_header(w, &field.spec, Role::Vector)?;
    for j in 0..field.spec.ny {
        for i in 0..field.spec.nx {
            let v = field.at(i, j);
            writeln!(w, "{} {} {:.17e} {:.17e}", i, j, v.x, v.y)?;
        }
    }
    Ok(())
}

pub fn write_scalar_field<W: Write>(w: &mut W, field: &ScalarField) -> std::io::Result<()> {
    write_header(w, &field.spec, Role::Scalar)?;
    for j in 0..field.spec.ny {
        for i in 0..field.spec.nx {
            writeln!(w, "{} {} {:.17e}", i, j, field.at(i, j))?;
        }
    }
    Ok(())
}

pub fn write_complex_field<W: Write>(w: &mut W, field: &ComplexField) -> std::io::Result<()> {
    write_header(w, &field.spec, Role::Complex)?;
    for j in 0..field.spec.ny {
        for i in 0..field.spec.nx {
            let v = field.at(i, j);
            writeln!(w, "{} {} {:.17e} {:.17e}", i, j, v.re, v.im)?;
        }
    }
    Ok(())
}

#[derive(Debug)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
    Complex(ComplexField),
}

impl AnyField {
    pub fn role(&self) -> Role {
        match self {
            AnyField::Scalar(_) => Role::Scalar,
            AnyField::Vector(_) => Role::Vector,
            AnyField::Complex(_) => Role::Complex,
        }
    }

    pub fn spec(&self) -> &GridSpec {
        match self {
            AnyField::Scalar(f) => &f.spec,
            AnyField::Vector(f) => &f.spec,
            AnyField::Complex(f) => &f.spec,
        }
    }
}

/// Parse a field file; errors carry the offending line number.
pub fn read_field<R: BufRead>(r: R, path: &str) -> Result<AnyField> {
    let fail = |line: usize, msg: &str| Error::Parse {
        path: path.to_string(),
        line,
        msg: msg.to_string(),
    };
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| fail(1, "empty file"))?;
    let header = header?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 {
        return Err(fail(1, "header must be 'nx ny h ox oy role'"));
    }
    let nx: usize = parts[0].parse().map_err(|_| fail(1, "bad nx"))?;
    let ny: usize = parts[1].parse().map_err(|_| fail(1, "bad ny"))?;
    let h: f64 = parts[2].parse().map_err(|_| fail(1, "bad h"))?;
    let ox: f64 = parts[3].parse().map_err(|_| fail(1, "bad origin x"))?;
    let oy: f64 = parts[4].parse().map_err(|_| fail(1, "bad origin y"))?;
    let role = match parts[5] {
        "scalar" => Role::Scalar,
        "vector" => Role::Vector,
        "complex" => Role::Complex,
        other => return Err(fail(1, &format!("unknown role '{other}'"))),
    };
    let spec = GridSpec::new(Vec2::new(ox, oy), h, nx, ny)
        .map_err(|e| fail(1, &format!("{e}")))?;

    let want = if role == Role::Scalar { 3 } else { 4 };
    let mut scalars = Vec::new();
    let mut vectors = Vec::new();
    let mut seen = 0usize;
    for (lineno, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != want {
            return Err(fail(lineno + 1, &format!("expected {want} fields, got {}", nums.len())));
        }
        let i: usize = nums[0].parse().map_err(|_| fail(lineno + 1, "bad node index i"))?;
        let j: usize = nums[1].parse().map_err(|_| fail(lineno + 1, "bad node index j"))?;
        if i >= nx || j >= ny {
            return Err(fail(lineno + 1, "node index out of range"));
        }
        if spec.idx(i, j) != seen {
            return Err(fail(lineno + 1, "records must be row-major and complete"));
        }
        seen += 1;
        match role {
            Role::Scalar => {
                let s: f64 = nums[2].parse().map_err(|_| fail(lineno + 1, "bad value"))?;
                if !s.is_finite() {
                    return Err(fail(lineno + 1, "non-finite value"));
                }
                scalars.push(s);
            }
            Role::Vector | Role::Complex => {
                let a: f64 = nums[2].parse().map_err(|_| fail(lineno + 1, "bad first component"))?;
                let b: f64 = nums[3].parse().map_err(|_| fail(lineno + 1, "bad second component"))?;
                if !a.is_finite() || !b.is_finite() {
                    return Err(fail(lineno + 1, "non-finite value"));
                }
                vectors.push((a, b));
            }
        }
    }
    if seen != spec.len() {
        return Err(fail(0, &format!("expected {} records, got {seen}", spec.len())));
    }
    Ok(match role {
        Role::Scalar => AnyField::Scalar(Grid { spec, values: scalars }),
        Role::Vector => AnyField::Vector(Grid {
            spec,
            values: vectors.into_iter().map(|(a, b)| Vec2::new(a, b)).collect(),
        }),
        Role::Complex => AnyField::Complex(Grid {
            spec,
            values: vectors.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
        }),
    })
}
