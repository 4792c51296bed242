from django.core.management.base import BaseCommand

from operators.reporting import INPUT_ERRORS, dumps, invalid_input, violations_found, write_json
from wcond_modules.condops import assemble_matrix
from wcond_modules.instances import load_instance, matrix_to_json
from wcond_modules.spectra import spectrum_report
from wcond_modules.verification import RunConfig


def _format(z: complex) -> str:
    return f"{z.real:.6g}{z.imag:+.6g}i" if z.imag else f"{z.real:.6g}"


class Command(BaseCommand):
    help = "Report the spectrum, point spectra and Aluthge iterates of an operator instance"

    def add_arguments(self, parser):
        parser.add_argument("instance", help="Path to an instance JSON file")
        parser.add_argument("--tol", type=float, help="Comparison tolerance")
        parser.add_argument("--depth", type=int, help="Number of Aluthge iterations")
        parser.add_argument("--json", dest="json_path", help="Write the JSON report to this file")
        parser.add_argument(
            "--matrix", action="store_true", help="Include the dense matrix of the operator in the JSON report"
        )

    def handle(self, *args, **options):
        try:
            T = load_instance(options["instance"])
            config = RunConfig.from_settings(tol=options["tol"], depth=options["depth"])
        except INPUT_ERRORS as e:
            raise invalid_input(e)

        report = spectrum_report(T, config.tol, config.depth)
        data = report.to_dict()
        if options["matrix"]:
            data["matrix"] = matrix_to_json(assemble_matrix(T))
        if options["json_path"]:
            write_json(data, options["json_path"])

        self.stdout.write("eigenvalues: " + ", ".join(_format(z) for z in report.eigenvalues))
        self.stdout.write("ess range E(uw): " + ", ".join(_format(z) for z in report.ess_range))
        self.stdout.write(f"spectral radius: {report.spectral_radius:.10g}")
        self.stdout.write(f"norm: {report.norm:.10g}")
        if options["verbosity"] > 1:
            self.stdout.write(dumps(data))

        if not report.passed:
            for text in report.violations:
                self.stderr.write(text)
            raise violations_found(len(report.violations))
