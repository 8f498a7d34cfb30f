// SPDX-License-Identifier: Apache-2.0

//! Server, gesture demo and evaluation front end for `sightline-core`.

pub mod config;
pub mod mock_backend;
pub mod server;
