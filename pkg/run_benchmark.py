from argparse import ArgumentParser

from benchmark import check_benchmark_config, run_benchmark
from utils import nice_print, read_yaml_config, set_random_seeds


def main(args):
    """
    Main function to run the benchmark. It reads the config file, checks the
    benchmark configuration and runs every enabled synthetic study.

    Args:
        args (Namespace): The command line arguments.
    """
    config = read_yaml_config(args.config)
    check_benchmark_config(config)
    set_random_seeds(config["seed"])

    nice_print(f"Running benchmark {config['benchmark_id']}")
    run_benchmark(config)
    nice_print("Benchmark done")


if __name__ == "__main__":
    parser = ArgumentParser()
    parser.add_argument(
        "--config", default="config.yaml", type=str, help="Path to the config file."
    )
    args = parser.parse_args()
    main(args)
