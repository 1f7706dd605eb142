/// Neumaier-compensated running sum. Feeding values in a fixed order gives a
/// result that does not depend on how they were produced.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Mean and standard error (sample sd / √n) of a slice, summed in index order.
pub(crate) fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut s = CompensatedSum::default();
    for &x in xs {
        s.add(x);
    }
    let mean = s.value() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut ss = CompensatedSum::default();
    for &x in xs {
        let d = x - mean;
        ss.add(d * d);
    }
    let var = ss.value() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
