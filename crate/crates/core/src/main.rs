// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(qdarwin::cli::main_with(std::env::args_os()));
}
