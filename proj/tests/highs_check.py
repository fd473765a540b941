# Copyright 2026 The mattrib Authors.
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

"""Reads a CPLEX LP file with HiGHS, solves it and prints one summary line.

Output: `<read status> <model status> <columns> <rows> <objective>`.
Exit code 77 when highspy is unavailable.
"""

import sys

try:
    import highspy
except ImportError:
    sys.exit(77)


def main(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    read = h.readModel(path)
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    obj = h.getInfo().objective_function_value
    print(read.name, status.replace(" ", "_"), h.getNumCol(), h.getNumRow(), repr(obj))


if __name__ == "__main__":
    main(sys.argv[1])
