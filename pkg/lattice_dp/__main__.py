from dotenv import load_dotenv

load_dotenv()

from .cli import cli  # noqa: E402

cli(prog_name="lattice-dp")
