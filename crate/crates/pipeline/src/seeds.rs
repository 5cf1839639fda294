//! Seed derivation. Every random stream comes from the run seed mixed with
//! the job coordinates, so results do not depend on scheduling.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stage {
    Simulate = 1,
    FitContour = 2,
    Generate = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one job: the base seed folded with each coordinate in turn.
pub fn derive(base: u64, stage: Stage, coords: &[i64]) -> u64 {
    let mut h = splitmix64(base ^ splitmix64(stage as u64));
    for &c in coords {
        h = splitmix64(h ^ c as u64);
    }
    h
}

/// Job seed for a (region, year, month, lead) forecast.
pub fn job(base: u64, stage: Stage, region: u32, year: i32, month: u8, lead: f64) -> u64 {
    derive(base, stage, &[i64::from(region), i64::from(year), i64::from(month), (lead * 2.0).round() as i64])
}
