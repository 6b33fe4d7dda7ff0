"""Result files and figures written by the run commands."""
