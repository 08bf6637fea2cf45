// Copyright 2026 The epiq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epiq/protocol.hpp"

namespace epiq {

/// Syntax or validation error in a protocol file, with 1-based coordinates.
class SpecParseError : public std::invalid_argument {
  public:
    SpecParseError(std::size_t line, std::size_t column, const std::string &what)
        : std::invalid_argument("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                                what),
          line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

/// Exact real literal:
///   num ::= decimal | "1/sqrt(" int ")" | "-1/sqrt(" int ")" | ["-"] "sqrt(" int "/" int ")"
/// With `allow_ratio`, also ["-"] int "/" int (used for expected values).
/// Throws std::invalid_argument on anything else.
double parse_number(std::string_view text, bool allow_ratio = false);

/// Shortest exact form from the grammar above when one matches to 1e-15,
/// otherwise "%.17g".
std::string format_number(double v);

/// Comma-separated amplitude list.
std::vector<cplx> parse_amplitudes(std::string_view text);
std::string format_amplitudes(const std::vector<cplx> &amps);

/// Parses the protocol file format:
///
///   name: <id>
///   systems:      R 2 | F 2 candidate | W observer mW:2 [more:dim ...]
///   initial:      R = <amps> | S F = <amps>        (unlisted labels start in |0>)
///   steps:        unitary id=.. on=A,B gate=CNOT | matrix=[[..],[..]]
///                 measure id=.. actor=.. target=.. basis=std|lab|ghz|[[..],..] slot=.. [outcomes=..]
///                 decohere id=.. actor=.. target=.. basis=.. [slot=..]
///                 leak id=.. from=.. to=.. slot=..
///                 (any step may add when=<alternative>)
///   priors:       <alternative> <weight> | disclose_at <t>
///   halt:         <step> <outcome>
///   options:      gate_override true|false
///   states:       t=<k> [history=<id>] on=<labels> = <amps>
///   checks:       <kind> <subject> = <expected> [<provenance>]
///
/// Blank lines and '#' comments are ignored.
ProtocolSpec parse_spec(std::string_view text);
ProtocolSpec load_spec(const std::string &path);

/// Inverse of parse_spec: parse_spec(export_spec(s)) describes the same
/// protocol.
std::string export_spec(const ProtocolSpec &spec);

} // namespace epiq
