# Copyright (C) 2026  The locclab developers

# This library is free software; you can redistribute it and/or
# modify it under the terms of the GNU Lesser General Public
# License as published by the Free Software Foundation;
# version 2.1 of the License.

# This library is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the GNU
# Lesser General Public License for more details.

# You should have received a copy of the GNU Lesser General Public
# License along with this library; if not, write to the Free Software
# Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston, MA  02110-1301  USA

"""
Exception classes for locclab.
"""

class LoccException(Exception):
    """
    Class for locclab Exceptions.
    """
    def __init__(self, msg):
        Exception.__init__(self, msg)

class StructureException(LoccException):
    """
    Class for malformed input: bad shapes, dimensions, histories or files.
    """
    def __init__(self, msg):
        LoccException.__init__(self, msg)

class InvariantViolation(LoccException):
    """
    Class for internal consistency failures, such as rank patterns that no
    verified protocol can have.  These point at a tolerance or verifier
    problem rather than at the user's input.
    """
    def __init__(self, msg):
        LoccException.__init__(self, msg)

class ReductionException(LoccException):
    """
    Class for reduction failures.  In addition to an error message, it
    also has a step member with the 1-based index of the failing step.
    """
    def __init__(self, msg, step):
        LoccException.__init__(self, msg)
        self.step = step
