#!/usr/bin/env python3
# Copyright 2026 The seqdfa Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Solve an LP-format MILP with HiGHS and print its optimal objective."""

import argparse
import sys

import highspy


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("lp_file")
    args = parser.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    if h.readModel(args.lp_file) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.lp_file}", file=sys.stderr)
        return 2
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        print(f"status {h.modelStatusToString(status)}", file=sys.stderr)
        return 1
    print(f"objective {h.getInfo().objective_function_value:.12g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
