use crate::vehicle::ExogenousInput;
use crate::{Error, Result, Scalar};

/// One of the three driving scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SampleId {
    One,
    Two,
    Three,
}

impl SampleId {
    pub const ALL: [SampleId; 3] = [SampleId::One, SampleId::Two, SampleId::Three];

    pub fn number(self) -> u8 {
        match self {
            SampleId::One => 1,
            SampleId::Two => 2,
            SampleId::Three => 3,
        }
    }

    /// Initial speed in m/s; every other initial state component is zero.
    pub fn initial_velocity(self) -> f64 {
        match self {
            SampleId::One => 20.0,
            SampleId::Two => 28.0,
            SampleId::Three => 25.0,
        }
    }

    pub fn input<T: Scalar>(self, t: T) -> ExogenousInput<T> {
        let c = T::lit;
        match self {
            SampleId::One => ExogenousInput::new(
                c(0.01) + c(0.07) * (c(1.3) * t).cos() + c(0.08) * (c(0.07) * t).sin(),
                c(0.015) * (c(0.8) * t).sin(),
            ),
            SampleId::Two => ExogenousInput::new(
                c(0.01) + c(0.04) * (c(0.7) * t).cos() + c(0.12) * (c(0.13) * t).sin(),
                c(0.006) * (c(1.2) * t).sin() + c(0.004) * (c(0.3) * t).cos(),
            ),
            SampleId::Three => ExogenousInput::new(
                c(0.01) + c(0.05) * t.cos() + c(0.1) * (c(0.1) * t).sin(),
                c(0.02) * t.sin(),
            ),
        }
    }
}

impl TryFrom<u8> for SampleId {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(SampleId::One),
            2 => Ok(SampleId::Two),
            3 => Ok(SampleId::Three),
            other => Err(Error::UnknownSample(other)),
        }
    }
}

/// Exogenous input of data sample `sample_id` at time `t`.
pub fn input_signal<T: Scalar>(t: T, sample_id: u8) -> Result<ExogenousInput<T>> {
    Ok(SampleId::try_from(sample_id)?.input(t))
}
