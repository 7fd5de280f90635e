//! Small numeric helpers shared across modules.

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Compensated::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplex {
    pub re: Compensated,
    pub im: Compensated,
}

impl CompensatedComplex {
    pub fn add(&mut self, re: f64, im: f64) {
        self.re.add(re);
        self.im.add(im);
    }

    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.value(), self.im.value())
    }
}

/// Double-double product `a * b` as `(hi, lo)`.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}
