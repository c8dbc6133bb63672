// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(rppp::cli::run_cli(std::env::args_os()).code());
}
