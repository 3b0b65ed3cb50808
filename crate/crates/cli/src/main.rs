// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(chipvec_cli::dispatch(std::env::args_os()));
}
