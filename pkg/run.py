from dotenv import load_dotenv

# Load environment variables from .env file before the config classes read them
load_dotenv()

from lattice_dp.cli import cli  # noqa: E402

if __name__ == '__main__':
    # LATTICE_DP_ENV selects development / production / testing
    cli(prog_name="lattice-dp")
