/* Dump the senone sequence table, one row per state sequence. */

void dict2pid_dump(FILE *fp, model_t *mdef)
{
    int32 i;
    int32 j;
    for (i = 0; i < mdef->n_sseq; i++) {
        fprintf(fp, "%d", i);
        for (j = 0; j < mdef->n_emit; j++)
            fprintf(fp, " %d", mdef->sseq[i][j]);
    }
}
