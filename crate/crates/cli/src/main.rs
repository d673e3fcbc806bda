#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `talbot`: command-line front end for the Talbot-effect numerics.
//!
//! Exit status is 0 on success, 1 for invalid input or I/O failure and 2
//! when a numerical tolerance cannot be met.

mod args;
mod config;
mod json;
mod run;

fn main() {
    std::process::exit(run::main_code());
}
