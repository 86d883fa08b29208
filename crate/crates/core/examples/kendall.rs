//! Kendall tau distance between two rankings of the same items.

use collmind::metrics::kendall_tau_distance;
use collmind::network::RankTable;

fn main() -> collmind::error::Result<()> {
    let a = RankTable::from_ranks(vec![1, 2, 3, 4, 5])?;
    for ranks in [vec![1, 2, 3, 4, 5], vec![2, 1, 3, 4, 5], vec![5, 4, 3, 2, 1], vec![3, 1, 4, 5, 2]] {
        let b = RankTable::from_ranks(ranks.clone())?;
        println!("{ranks:?} -> {:.2}", kendall_tau_distance(&a, &b)?);
    }
    Ok(())
}
