// SPDX-License-Identifier: Apache-2.0

//! Ordered map over a batch, on a rayon pool or on the calling thread.
//!
//! Without the `parallel` feature every [`Execution`] runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// `threads == 0` lets rayon pick.
    Parallel { threads: usize },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { threads: 0 }
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn from_parallelism(threads: usize) -> Self {
        if threads == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { threads }
        }
    }

    /// Applies `f` to every item; output order matches input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(usize, &T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads } => {
                use rayon::prelude::*;
                let run = || items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
                if threads == 0 {
                    run()
                } else {
                    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                        Ok(pool) => pool.install(run),
                        Err(e) => {
                            tracing::warn!("thread pool unavailable ({e}); running sequentially");
                            items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
                        }
                    }
                }
            }
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel { .. } => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        }
    }
}
