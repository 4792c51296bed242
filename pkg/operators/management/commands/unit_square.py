from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from operators.reporting import EXIT_INVALID_INPUT, violations_found, write_json
from wcond_modules.unit_square import unit_square_report


class Command(BaseCommand):
    help = "Reproduce the unit-square operator: strip statistics, Hoelder sign report and classification"

    def add_arguments(self, parser):
        parser.add_argument("--grid", type=int, help="Cells per side (at least 8)")
        parser.add_argument("--oracle-grid", type=int, help="Cells per side for the dense oracle")
        parser.add_argument("--json", dest="json_path", help="Write the JSON report to this file")

    def handle(self, *args, **options):
        grid = options["grid"]
        if grid is None:
            grid = settings.WCOND["GRID"]
        oracle_grid = options["oracle_grid"]
        if oracle_grid is None:
            oracle_grid = settings.WCOND["ORACLE_GRID"]
        try:
            report = unit_square_report(grid, oracle_grid, settings.WCOND["TOL"])
        except ValueError as e:
            raise CommandError(str(e), returncode=EXIT_INVALID_INPUT)

        if options["json_path"]:
            write_json(report.to_dict(), options["json_path"])

        for name, value in report.max_deviation.items():
            self.stdout.write(f"max deviation {name}: {value:.3e}")
        self.stdout.write(f"claimed: {report.sign['claimed']}")
        self.stdout.write(f"computed |E(uw)|^2 - E|u|^2 E|w|^2: {report.sign['computed']}")
        self.stdout.write(f"spectral radius {report.radius:.6f}, norm {report.norm:.6f}")
        for label, verdict in report.oracle.items():
            self.stdout.write(f"{label:<28} {verdict}")

        if report.violations:
            for text in report.violations:
                self.stderr.write(text)
            raise violations_found(len(report.violations))
