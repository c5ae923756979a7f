// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#ifndef SEDFPD_CLI_H_
#define SEDFPD_CLI_H_

#include <iosfwd>
#include <map>
#include <string>

namespace sedfpd {

/// Config overrides behind `train --variant`: weak sets train.lambda_fpd = 0,
/// fpd-euc and fpd-ip set fpd.metric. Throws ValidationError otherwise.
void apply_variant(const std::string& variant, std::map<std::string, std::string>& values);

/// Entry point of the sedfpd tool: synth, train, eval and report.
/// Returns 0 on success, 1 on parse or validation errors, 2 on runtime
/// errors (I/O, numerics).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sedfpd

#endif  // SEDFPD_CLI_H_
