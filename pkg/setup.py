from distutils.core import setup, Command
import subprocess

VERSION = '0.1.0'

datafiles = [('share/locclab', ['locclab.cfg'])]

class pytest(Command):
    user_options = []
    def initialize_options(self): pass
    def finalize_options(self): pass
    def run(self):
        try:
            errno = subprocess.call('py.test tests --verbose --tb=short --junitxml=tests/results.xml'.split())
        except OSError as e:
            if e.errno == 2:
                raise OSError(2, "No such file or directory: py.test")
            raise
        raise SystemExit(errno)

setup(name='locclab',
      version=VERSION,
      description='LOCC implementations of controlled-unitary gates',
      author='The locclab developers',
      license='LGPLv2',
      package_dir={'locclab': 'locclab'},
      packages=['locclab'],
      scripts=['locclab-tool'],
      cmdclass={'test' : pytest },
      data_files = datafiles,
      requires=['numpy', 'scipy'],
      )
