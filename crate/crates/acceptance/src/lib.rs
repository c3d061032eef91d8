//! Test-only package; see .
