//! Compute LBP, LTP, CS-LBP and CS-LTP codes at one pixel of a small ramp
//! image and print them in binary.
//!
//! cargo run --example patterns

use cslbp::patterns::{
    cs_lbp_code, cs_ltp_codes, lbp_code, ltp_codes, uniform_cs_lbp_bin, Family, PatternConfig,
};
use cslbp::GrayImage;

fn main() -> cslbp::Result<()> {
    let img = GrayImage::from_fn(5, 5, |x, y| (3 * x + y) as f64 / 16.0)?;
    let (x, y) = (2, 2);

    let lbp = lbp_code(&img, x, y, &PatternConfig::with_family(Family::Lbp))?;
    println!("LBP     {:08b}", lbp.value);

    let (pos, neg) = ltp_codes(&img, x, y, &PatternConfig::with_family(Family::Ltp))?;
    println!("LTP     +{:08b} -{:08b}", pos.value, neg.value);

    let cs = cs_lbp_code(&img, x, y, &PatternConfig::with_family(Family::CsLbp))?;
    println!(
        "CS-LBP  {:04b} (uniform bin {})",
        cs.value,
        uniform_cs_lbp_bin(cs)
    );

    let (pos, neg) = cs_ltp_codes(&img, x, y, &PatternConfig::with_family(Family::CsLtp))?;
    println!("CS-LTP  +{:04b} -{:04b}", pos.value, neg.value);
    Ok(())
}
