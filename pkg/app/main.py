"""
Línea de comandos del motor de verificación
"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.api.commands import RunConfig, run_command
from app.api.reports import error_payload, write_report
from app.core.config import settings
from app.core.errors import EngineError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_ERROR = 2


def configure_logging(level: Optional[str] = None) -> None:
    # stdout queda reservado para los informes
    logging.basicConfig(
        level=level or settings.LOG_LEVEL,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def _ladder(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"escalera no válida: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goldbach-verify",
        description="Verificación numérica de las fórmulas explícitas para S̃(z) y para el promedio de Cesàro de r_G",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--zeros", help="tabla de ordenadas (ruta o URL http(s)); por defecto ZEROS_PATH o la incluida")
    common.add_argument("--max-zeros", type=int, dest="max_zeros", help="K: número de pares de ceros")
    common.add_argument("--prime-cutoff", type=int, dest="prime_cutoff", help="M: corte de la serie de Dirichlet")
    common.add_argument("--precision", type=int, default=settings.PRECISION_BITS, help="bits de mantisa")
    common.add_argument("--quad-tol", type=float, dest="quad_tol", default=settings.QUAD_TOLERANCE)
    common.add_argument("--ladder", type=_ladder, help="escalera de K separada por comas, p.ej. 100,500,2000")
    common.add_argument("--out", help="fichero de salida; por defecto stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--log-level", dest="log_level", default=None)

    sub = parser.add_subparsers(dest="command", required=True)

    t1 = sub.add_parser("verify-t1", parents=[common], help="fórmula explícita para S̃(z)")
    t1.add_argument("--z", required=True, help='complejo "a+bi" con a > 0')

    t2 = sub.add_parser("verify-t2", parents=[common], help="promedio de Cesàro Σ r_G(n)(N − n)")
    t2.add_argument("--n", type=int, required=True, help="N > 4")

    sweep = sub.add_parser("sweep-f", parents=[common], help="F(N)/N² sobre una malla de N")
    sweep.add_argument("--n-grid", dest="n_grid", help='"a:b:log[:n]", "a:b:lin[:n]" o lista')
    sweep.add_argument("--reference-n", dest="reference_n", type=int, default=500)

    regime = sub.add_parser("regime-e", parents=[common], help="regímenes del término de error E(a, y)")
    regime.add_argument("--a", dest="a_grid", help="valores de a = Re(z)")
    regime.add_argument("--y-grid", dest="y_grid", help="valores de y = Im(z)")
    regime.add_argument("--include-truncated", dest="include_truncated", action="store_true")

    forms = sub.add_parser("validate-forms", parents=[common], help="formas cerradas frente a cuadratura")
    forms.add_argument("--u", dest="u_grid", help="valores de u, p.ej. 10,20,50")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    options = {key: value for key, value in vars(args).items() if key != "log_level" and value is not None}

    try:
        config = RunConfig(**options)
        envelope = run_command(config)
    except ValidationError as exc:
        logger.error(f"❌ Configuración no válida: {exc}", exc_info=True)
        sys.stdout.write(error_payload(str(exc)))
        return EXIT_ERROR
    except EngineError as exc:
        logger.error(f"❌ Error en {exc.term or args.command}: {exc}", exc_info=True)
        sys.stdout.write(error_payload(str(exc), exc.term))
        return EXIT_ERROR

    write_report(envelope, config.format, config.out, stream=sys.stdout)
    if not envelope.passed:
        logger.warning(f"⚠️ Comprobaciones fallidas: {', '.join(envelope.failed_checks)}")
        return EXIT_FAILED_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
