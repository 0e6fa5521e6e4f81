//! Minimal scoped worker pool: workers pull tile indices from a shared
//! atomic counter. Every tile writes a disjoint slice of the output, so the
//! result is identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Run `tile_fn` for every index in `0..tiles` across `workers` threads.
///
/// `tile_fn` must only touch state disjoint per tile; it receives the tile
/// index. With `workers == 1` everything runs on the calling thread.
pub fn run_tiles<F>(tiles: usize, workers: usize, tile_fn: F)
where
    F: Fn(usize) + Sync,
{
    // Oversubscribing cores only adds contention; cap threads at hardware
    // parallelism the way any pool does.
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    let workers = workers.max(1).min(tiles.max(1)).min(hw);
    if workers <= 1 {
        for t in 0..tiles {
            tile_fn(t);
        }
        return;
    }
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= tiles {
                    break;
                }
                tile_fn(t);
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicU64;

    #[test]
    fn covers_every_tile_once() {
        let hits: Vec<AtomicU64> = (0..97).map(|_| AtomicU64::new(0)).collect();
        run_tiles(97, 4, |t| {
            hits[t].fetch_add(1, Ordering::Relaxed);
        });
        assert!(hits.iter().all(|h| h.load(Ordering::Relaxed) == 1));
    }
}
