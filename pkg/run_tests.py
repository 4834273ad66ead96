#!/usr/bin/env python3
"""
Test runner script for the ultraretract toolkit
"""
import os
import subprocess
import sys

COVERAGE_ARGS = [
    "--cov=app",
    "--cov-report=term-missing",
    "--cov-report=html:coverage_html",
]


def _pytest(label, extra, success):
    print(label)
    print("=" * 50)

    os.environ["ENVIRONMENT"] = "test"
    cmd = [sys.executable, "-m", "pytest", "tests/", "--tb=short", *extra]

    try:
        subprocess.run(cmd, check=True)
        print(f"\n{success}")
        return 0
    except subprocess.CalledProcessError as e:
        print(f"\n❌ Tests failed with exit code {e.returncode}")
        return e.returncode


def run_tests():
    """Run all tests with coverage"""
    return _pytest(
        "🚀 Running ultraretract Tests",
        ["-v", *COVERAGE_ARGS],
        "✅ All tests completed successfully!",
    )


def run_quick_tests():
    """Skip the tests that drive searches to large stages"""
    return _pytest(
        "🧪 Running Quick Tests",
        ["-v", "-m", "not slow"],
        "✅ Quick tests completed successfully!",
    )


def run_slow_tests():
    return _pytest(
        "🐢 Running Slow Tests Only",
        ["-v", "-m", "slow"],
        "✅ Slow tests completed successfully!",
    )


def run_integration_tests():
    """Run only the command-line tests"""
    return _pytest(
        "🔗 Running Integration Tests Only",
        ["-v", "-m", "integration"],
        "✅ Integration tests completed successfully!",
    )


def show_test_coverage():
    return _pytest(
        "📊 Generating Test Coverage Report",
        [*COVERAGE_ARGS, "--quiet"],
        "📈 Coverage report generated in 'coverage_html' directory",
    )


COMMANDS = {
    "quick": run_quick_tests,
    "slow": run_slow_tests,
    "integration": run_integration_tests,
    "coverage": show_test_coverage,
}


def main():
    if len(sys.argv) == 1:
        return run_tests()

    command = sys.argv[1]
    if command == "help":
        print_help()
        return 0
    if command not in COMMANDS:
        print(f"Unknown command: {command}")
        print_help()
        return 1
    return COMMANDS[command]()


def print_help():
    print(
        """
ultraretract Test Runner

Usage:
  python run_tests.py [command]

Commands:
  quick        - Skip slow tests
  slow         - Run only slow tests
  integration  - Run only command-line tests
  coverage     - Generate coverage report
  help         - Show this help message

If no command is provided, runs all tests with coverage.
"""
    )


if __name__ == "__main__":
    sys.exit(main())
