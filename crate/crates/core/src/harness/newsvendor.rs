use crate::dro::LossTable;
use crate::processes::FiniteIidModel;

pub const NEWSVENDOR_COST: f64 = 5.0;
pub const NEWSVENDOR_PRICE: f64 = 7.0;
const TRIALS: usize = 10;
const STATES: usize = TRIALS + 1;

/// Demand `1 + Binomial(10, 1/2)` on `{1, ..., 11}` and the loss table
/// `l(x, i) = k x - p min(x, i)` for order quantities `x = 1..=11`.
pub fn newsvendor_scenario() -> (FiniteIidModel, LossTable) {
    let mut probs = Vec::with_capacity(STATES);
    let mut binom = 1.0f64;
    for i in 0..STATES {
        probs.push(binom / 1024.0);
        binom = binom * (TRIALS - i) as f64 / (i + 1) as f64;
    }
    let model = FiniteIidModel::new(probs).expect("binomial pmf is a valid model");
    let mut losses = Vec::with_capacity(STATES * STATES);
    for x in 1..=STATES {
        for i in 1..=STATES {
            losses.push(NEWSVENDOR_COST * x as f64 - NEWSVENDOR_PRICE * x.min(i) as f64);
        }
    }
    let table = LossTable::new(STATES, STATES, losses, (1..=STATES).map(|x| x.to_string()).collect())
        .expect("newsvendor table is well formed");
    (model, table)
}

/// The optimal order quantity (1-based) and its expected cost under the true pmf.
pub fn newsvendor_optimum() -> (usize, f64) {
    let (model, table) = newsvendor_scenario();
    (0..table.num_decisions())
        .map(|x| (x + 1, table.row(x).iter().zip(model.probs()).map(|(l, p)| l * p).sum::<f64>()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}
