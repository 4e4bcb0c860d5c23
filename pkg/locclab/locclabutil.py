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
Miscellaneous utility functions.
"""

import os
import re
import json
import math
try:
    import configparser
except ImportError:
    import ConfigParser as configparser

import locclab.LoccException
import locclab.linalg

def string_to_bool(instr):
    """
    Function to take a string and determine whether it is True, Yes, False,
    or No.  It takes a single argument, which is the string to examine.

    Returns True if instr is "Yes" or "True", False if instr is "No"
    or "False", and None otherwise.
    """
    if instr is None:
        raise locclab.LoccException.LoccException("Input string was None!")
    lower = instr.lower()
    if lower == 'no' or lower == 'false':
        return False
    if lower == 'yes' or lower == 'true':
        return True
    return None

def config_get_key(config, section, key, default):
    """
    Function to retrieve config parameters out of the config file.
    """
    if config is not None and config.has_section(section) and config.has_option(section, key):
        return config.get(section, key)
    else:
        return default

def config_get_boolean_key(config, section, key, default):
    """
    Function to retrieve boolean config parameters out of the config file.
    """
    value = config_get_key(config, section, key, None)
    if value is None:
        return default

    retval = string_to_bool(value)
    if retval is None:
        raise locclab.LoccException.LoccException("Configuration parameter '%s' must be True, Yes, False, or No" % (key))

    return retval

def config_get_float_key(config, section, key, default):
    """
    Function to retrieve real-valued config parameters out of the config file.
    """
    value = config_get_key(config, section, key, None)
    if value is None:
        return default

    try:
        return float(value)
    except ValueError:
        raise locclab.LoccException.LoccException("Configuration parameter '%s' must be a number, saw '%s'" % (key, value))

def config_get_int_key(config, section, key, default):
    """
    Function to retrieve integer config parameters out of the config file.
    """
    value = config_get_key(config, section, key, None)
    if value is None:
        return default

    try:
        return int(value)
    except ValueError:
        raise locclab.LoccException.LoccException("Configuration parameter '%s' must be an integer, saw '%s'" % (key, value))

def parse_config(config_file):
    """
    Function to parse the configuration file.  If the passed in config_file is
    None, then the default configuration file is used.
    """
    if config_file is None:
        if os.geteuid() == 0:
            config_file = "/etc/locclab/locclab.cfg"
        else:
            config_file = "~/.locclab/locclab.cfg"
    # if config_file was not None on input, then it was provided by the caller
    # and we use that instead

    config_file = os.path.expanduser(config_file)

    config = configparser.ConfigParser()
    if os.access(config_file, os.F_OK):
        config.read(config_file)

    return config

def tolerance_from_config(config, override=None):
    """
    Function to build the Tolerance in effect.  Precedence, lowest first:
    built-in defaults, the [tolerance] section of the config, the
    LOCCLAB_EPS environment variable, and finally an explicit override.
    """
    eps_rank = config_get_float_key(config, 'tolerance', 'eps_rank',
                                    locclab.linalg.DEFAULT_EPS)
    eps_eq = config_get_float_key(config, 'tolerance', 'eps_eq',
                                  locclab.linalg.DEFAULT_EPS)

    env = os.getenv('LOCCLAB_EPS')
    if env is not None:
        try:
            eps_rank = eps_eq = float(env)
        except ValueError:
            raise locclab.LoccException.LoccException("LOCCLAB_EPS must be a number, saw '%s'" % (env))

    if override is not None:
        eps_rank = eps_eq = float(override)

    return locclab.linalg.Tolerance(eps_rank, eps_eq)

_theta_re = re.compile(r'^\s*(-?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$')

def parse_theta(instr):
    """
    Function to parse an angle given either as decimal radians ("0.785")
    or symbolically as a fraction of pi ("pi", "pi/4", "3pi/4", "-pi/2",
    "2*pi/3").  Returns the angle in radians as a float.
    """
    if instr is None:
        raise locclab.LoccException.StructureException("Angle string was None!")

    try:
        value = float(instr)
    except ValueError:
        value = None
    if value is not None:
        if not math.isfinite(value):
            raise locclab.LoccException.StructureException("Angle '%s' is not finite" % (instr))
        return value

    match = _theta_re.match(instr.lower())
    if match is None:
        raise locclab.LoccException.StructureException("Could not parse angle '%s'" % (instr))

    sign, factor, divisor = match.groups()
    value = math.pi
    if factor:
        value *= float(factor)
    if divisor:
        if float(divisor) == 0:
            raise locclab.LoccException.StructureException("Division by zero in angle '%s'" % (instr))
        value /= float(divisor)
    if sign:
        value = -value

    return value

def load_json(path):
    """
    Function to load a JSON document from a file.  Parse failures are
    reported as StructureException so the command line can map them.
    """
    try:
        with open(path) as f:
            return json.load(f)
    except (IOError, OSError) as err:
        raise locclab.LoccException.StructureException("Could not read %s: %s" % (path, err))
    except ValueError as err:
        raise locclab.LoccException.StructureException("Could not parse %s: %s" % (path, err))

def write_json(obj, path=None, stream=None):
    """
    Function to write a JSON document either to the file at path or to an
    already open stream.
    """
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path is not None:
        with open(path, 'w') as f:
            f.write(text)
            f.write('\n')
    elif stream is not None:
        stream.write(text)
        stream.write('\n')
    else:
        raise locclab.LoccException.LoccException("Either a path or a stream is required")
