//! Multiple vacations: the server keeps taking i.i.d. vacations `V` until one
//! ends with at least one customer present.

use num_complex::Complex64;

use super::{positive, TransferLaw};
use crate::batch::BatchLaw;
use crate::error::{invalid, Result};
use crate::pgf::PgfHandle;
use crate::service::ServiceLaw;

#[derive(Debug, Clone, PartialEq)]
pub struct MultipleVacations {
    /// Batch arrival rate during vacations.
    pub lambda_v: f64,
    pub batch: BatchLaw,
    pub vacation: ServiceLaw,
}

impl MultipleVacations {
    pub fn validate(&self) -> Result<()> {
        positive("vacation arrival rate", self.lambda_v)?;
        self.batch.validate()?;
        self.vacation.validate()?;
        if self.empty_probability() >= 1.0 - 1e-15 {
            return Err(invalid!("vacations are too short to ever collect a customer"));
        }
        Ok(())
    }

    /// Probability that a single vacation ends with nobody present.
    pub fn empty_probability(&self) -> f64 {
        self.vacation.lst(Complex64::new(self.lambda_v, 0.0)).re
    }

    /// `E[B0] = E[V] / (1 - F_V~(lambda_v))`, a geometric number of vacations.
    pub fn expected_duration(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.vacation.mean() / (1.0 - self.empty_probability()))
    }
}

/// `Psi(z) = (F_V~(lambda_v (1 - B_v(z))) - F_V~(lambda_v)) / (1 - F_V~(lambda_v))`.
pub fn multiple_vacation_psi(m: &MultipleVacations) -> Result<TransferLaw> {
    m.validate()?;
    let f0 = m.empty_probability();
    let mean_y = m.lambda_v * m.vacation.mean() * m.batch.mean() / (1.0 - f0);
    let spec = m.clone();
    let psi = PgfHandle::new(
        move |z| {
            let s = (1.0 - spec.batch.eval(z)) * spec.lambda_v;
            (spec.vacation.lst(s) - f0) / (1.0 - f0)
        },
        Some(mean_y),
    );
    TransferLaw::from_pgf(psi, mean_y)
}
