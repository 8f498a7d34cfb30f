// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

pub mod oracles;
pub mod scenes;
