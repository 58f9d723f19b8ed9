// SPDX-License-Identifier: Apache-2.0

//! Holds the `acceptance` test target; see `tests/acceptance.rs`.
