# Generated by Django 4.2 on 2026-10-18 09:12

import django.core.validators
from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='BenchRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('query', models.TextField(verbose_name='Запрос')),
                ('sources', models.TextField(blank=True, verbose_name='Файлы программы')),
                ('repetitions', models.PositiveIntegerField(validators=[django.core.validators.MinValueValidator(1)], verbose_name='Повторений')),
                ('semantics', models.CharField(choices=[('calling', 'M:G задаёт контекст вызова'), ('lookup', 'M:G задаёт только контекст поиска')], default='calling', max_length=10, verbose_name='Семантика')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Дата запуска')),
            ],
            options={
                'verbose_name': 'Запуск bench',
                'verbose_name_plural': 'Запуски bench',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='BenchTiming',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('variant', models.CharField(choices=[('runtime', 'Распространение при исполнении'), ('expanded', 'Расширение при загрузке'), ('specialized', 'Специализация'), ('univ', 'call/N через =../2')], max_length=12, verbose_name='Вариант')),
                ('median_seconds', models.FloatField(verbose_name='Медиана (с)')),
                ('solutions', models.PositiveIntegerField(default=0, verbose_name='Решений')),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='timings', to='prolog.benchrun', verbose_name='Запуск')),
            ],
            options={
                'verbose_name': 'Время варианта',
                'verbose_name_plural': 'Времена вариантов',
                'ordering': ['run', 'median_seconds'],
                'unique_together': {('run', 'variant')},
            },
        ),
    ]
